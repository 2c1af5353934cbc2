#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fdsim/impairments.hpp"
#include "fdsim/numerics.hpp"

using namespace fdsim;

namespace {

PaModel linear_pa() {
  PaModel pa;
  pa.x1 = 0.0;
  pa.x2 = 2.0;
  pa.x3 = 1.0;
  pa.x4 = 1.0;  // A(r) = r
  pa.y1 = 0.0;
  pa.y4 = 0.0;  // Phi(r) = 0
  return pa;
}

}  // namespace

TEST_CASE("identity parameters make the amplifier transparent") {
  RngStream rng(91, 0);
  CVec s = rng.complex_gaussian_vector(200, 1.0);
  PaModel pa = linear_pa();
  for (double ibo : {0.0, 8.0, 30.0}) {
    pa.input_backoff_db = ibo;
    CHECK((pa_apply(s, pa) - s).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("deep back-off reaches the small-signal linear regime") {
  // Cubic-order model whose small-signal gain is x4; at 30 dB back-off the
  // output must follow x4 * input to 0.1%.
  PaModel pa;
  pa.x1 = 0.5;
  pa.x2 = 3.0;
  pa.x3 = 1.0;
  pa.x4 = 1.0;
  pa.y1 = 0.3;
  pa.y2 = 3.0;
  pa.y3 = 1.0;
  pa.y4 = 0.0;
  pa.input_backoff_db = 30.0;
  RngStream rng(92, 0);
  CVec s = rng.complex_gaussian_vector(4000, 1.0);
  CVec out = pa_apply(s, pa);
  CHECK((out - pa.x4 * s).norm() / s.norm() < 1e-3);
}

TEST_CASE("two-tone input grows intermodulation products") {
  Eigen::Index n = 256;
  Eigen::Index k1 = 40, k2 = 46;  // IM3 lands on 2*k1-k2 = 34 and 2*k2-k1 = 52
  CVec s(n);
  for (Eigen::Index t = 0; t < n; ++t)
    s[t] = std::polar(1.0, 2.0 * M_PI * double(k1 * t) / double(n)) +
           std::polar(1.0, 2.0 * M_PI * double(k2 * t) / double(n));
  PaModel pa;  // default compressive AM/AM
  pa.input_backoff_db = 3.0;
  CVec spec = dft(pa_apply(s, pa), n);
  double im3 = std::max(std::abs(spec[34]), std::abs(spec[52]));
  CHECK(im3 > 1e-3);
  CVec spec_lin = dft(pa_apply(s, linear_pa()), n);
  CHECK(std::abs(spec_lin[34]) < 1e-12);
  CHECK(std::abs(spec_lin[52]) < 1e-12);
}

TEST_CASE("classic published AM/AM fit evaluates as printed") {
  PaModel pa;
  pa.x1 = 8.1081;
  pa.x2 = 1.5413;
  pa.x3 = 6.5202;
  pa.x4 = -0.0718;
  // Hand evaluation at r = 1: 8.1081/7.5202 - 0.0718.
  CHECK(pa.am_am(1.0) == doctest::Approx(1.00637).epsilon(1e-4));
  // Its gain is far from constant at small drive, which is why it is not the
  // shipped default for the transmit chain.
  CHECK(pa.am_am(0.01) / 0.01 < 0.7);
  CHECK(pa.am_am(0.1) / 0.1 > 1.5);
}

TEST_CASE("monotonicity validation accepts the default and rejects overdrive") {
  PaModel pa;  // defaults
  CHECK_NOTHROW(pa.validate(4.0));
  PaModel published;
  published.x1 = 8.1081;
  published.x2 = 1.5413;
  published.x3 = 6.5202;
  published.x4 = -0.0718;
  published.input_backoff_db = 0.0;
  CHECK_THROWS_AS(published.validate(4.0), std::invalid_argument);
}

TEST_CASE("transmit chain splits into linear, nonlinear and noise parts") {
  RngStream rng(93, 0);
  CVec s = rng.complex_gaussian_vector(274, 1.0);
  PaModel pa;
  auto t = make_tx_chain(s, &pa, -30.0, rng);
  CHECK((t.linear + t.nonlinear - t.post_pa).cwiseAbs().maxCoeff() < 1e-12);
  // LS split leaves the distortion orthogonal to the known baseband.
  cplx cross = s.dot(t.nonlinear);
  CHECK(std::abs(cross) / s.squaredNorm() < 1e-12);
  double evm = t.tx_noise.squaredNorm() / t.post_pa.squaredNorm();
  CHECK(10.0 * std::log10(evm) == doctest::Approx(-30.0).epsilon(0.15));
  // Without a PA the nonlinear part vanishes.
  auto lin = make_tx_chain(s, nullptr, -30.0, rng);
  CHECK(lin.nonlinear.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("self-interference modes cancel what they claim") {
  RngStream rng(94, 0);
  Eigen::Index n = 274, chains = 4;
  double self_db = 60.0, cross_db = 20.0, depth = 110.0;
  SiChannel si = draw_si_channel(rng, chains, self_db, cross_db);
  PaModel pa;
  std::vector<TxChainSignal> tx;
  for (Eigen::Index c = 0; c < chains; ++c)
    tx.push_back(make_tx_chain(rng.complex_gaussian_vector(n, 1.0), &pa, -30.0, rng));

  CVec zero = CVec::Zero(n);
  double p_none = 0, p_lin = 0, p_nl = 0, p_full = 0;
  for (Eigen::Index rx = 0; rx < chains; ++rx) {
    p_none += add_self_interference(zero, tx, si, rx, SicMode::None, depth).squaredNorm();
    p_lin += add_self_interference(zero, tx, si, rx, SicMode::LinearOnly, depth).squaredNorm();
    p_nl += add_self_interference(zero, tx, si, rx, SicMode::NlNoCtc, depth).squaredNorm();
    p_full += add_self_interference(zero, tx, si, rx, SicMode::Full, depth).squaredNorm();
  }
  // Residual power is monotone across the staged modes.
  CHECK(p_none >= p_lin);
  CHECK(p_lin >= p_nl);
  CHECK(p_nl >= p_full);
  // The uncancelled input sits near the configured self-talk level and the
  // full stage pushes everything below a -30 dB noise floor.
  double sig_pow = static_cast<double>(n);
  CHECK(10.0 * std::log10(p_none / (chains * sig_pow)) > 55.0);
  CHECK(p_full / (chains * sig_pow) < 1e-3);

  // No transmit activity leaves the receive signal untouched in every mode.
  CVec rx_sig = rng.complex_gaussian_vector(n, 1.0);
  std::vector<TxChainSignal> silent;
  for (Eigen::Index c = 0; c < chains; ++c) {
    TxChainSignal t0;
    t0.pre_pa = t0.post_pa = t0.linear = t0.nonlinear = t0.tx_noise = CVec::Zero(n);
    silent.push_back(t0);
  }
  for (auto mode : {SicMode::None, SicMode::LinearOnly, SicMode::NlNoCtc, SicMode::Full})
    CHECK((add_self_interference(rx_sig, silent, si, 0, mode, depth) - rx_sig)
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("self-talk outweighs cross-talk in the drawn couplings") {
  RngStream rng(95, 0);
  double self_acc = 0, cross_acc = 0;
  for (int rep = 0; rep < 200; ++rep) {
    SiChannel si = draw_si_channel(rng, 4, 60.0, 20.0);
    for (Eigen::Index rx = 0; rx < 4; ++rx)
      for (Eigen::Index tx = 0; tx < 4; ++tx) {
        double p = si.pair(rx, tx).squaredNorm();
        (rx == tx ? self_acc : cross_acc) += p;
      }
  }
  CHECK(self_acc / 800.0 > 100.0 * (cross_acc / 2400.0));
}

TEST_CASE("thermal noise power") {
  CHECK(thermal_noise_power(3e6, 290.0) == doctest::Approx(1.2012e-14).epsilon(1e-4));
  CHECK(thermal_noise_power(0.0, 290.0) == 0.0);
  CHECK(thermal_noise_power(2e6, 290.0) ==
        doctest::Approx(2.0 * thermal_noise_power(1e6, 290.0)));
  CHECK_THROWS_AS((void)thermal_noise_power(-1.0, 290.0), std::invalid_argument);
}

TEST_CASE("sic mode names round trip") {
  for (auto m : {SicMode::None, SicMode::LinearOnly, SicMode::NlNoCtc, SicMode::Full})
    CHECK(sic_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS((void)sic_mode_from_string("both"), std::invalid_argument);
}
