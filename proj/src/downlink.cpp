#include "fdsim/downlink.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fdsim {

namespace {

// Right inverse of the stacked (V^H) with per-tone conditioning guard.
CMat stack_right_inverse(const CMat& v_stack, bool& regularized) {
  CMat gram = v_stack.adjoint() * v_stack;  // K x K
  Eigen::LDLT<CMat> ldlt(gram);
  if (ldlt.info() == Eigen::Success && ldlt.rcond() > 1e-9) {
    regularized = false;
    return v_stack * ldlt.solve(CMat::Identity(gram.rows(), gram.cols()));
  }
  regularized = true;
  return pinv(v_stack.adjoint());
}

}  // namespace

PrecoderSet build_precoders(const FreqChannelSet& hf, const AllocationMap& alloc,
                            PowerPolicy policy, double n0) {
  PrecoderSet out;
  out.n_ue = hf.n_ue;
  out.n_enb = hf.enb_ue.empty() ? 0 : hf.enb_ue[0].rows();
  out.n_tones = alloc.n_data;
  if (out.n_ue > out.n_enb)
    throw std::invalid_argument("build_precoders: K > Ne is infeasible");
  Eigen::Index k = out.n_ue, m_tones = out.n_tones;
  out.u = CMat::Ones(k, m_tones);
  out.e.setZero(k, m_tones);
  out.beta.setZero(k, m_tones);
  out.e_eff.setZero(k, m_tones);
  out.p.resize(m_tones);

  std::vector<CMat> raw(m_tones);          // unscaled right-inverse columns
  Eigen::MatrixXd raw_col_sq(k, m_tones);  // squared norms of those columns

  for (Eigen::Index m = 0; m < m_tones; ++m) {
    Eigen::Index tone = alloc.tone_index[m];
    CMat v_stack(out.n_enb, k);
    for (Eigen::Index l = 0; l < k; ++l) {
      CVec h = hf.uplink_col(l, tone);  // downlink row transposed
      double e = h.norm();
      out.e(l, m) = e;
      // Rank-1 row SVD: U = 1, V = h^H / ||h|| (conjugated column).
      v_stack.col(l) = e > 0.0 ? CVec(h.conjugate() / e) : CVec::Unit(out.n_enb, l);
    }
    bool reg = false;
    raw[m] = stack_right_inverse(v_stack, reg);
    if (reg) ++out.regularized_tones;
    for (Eigen::Index l = 0; l < k; ++l) raw_col_sq(l, m) = raw[m].col(l).squaredNorm();
  }

  // Power weights. Unit per-UE column power is the reference scale, so the
  // per-tone total budget is K.
  switch (policy) {
    case PowerPolicy::Equal: {
      for (Eigen::Index m = 0; m < m_tones; ++m)
        for (Eigen::Index l = 0; l < k; ++l)
          out.beta(l, m) = 1.0 / std::sqrt(std::max(raw_col_sq(l, m), 1e-30));
      break;
    }
    case PowerPolicy::WaterFill: {
      // Per tone across UEs, total K; inverse gains 1/g = n0 ||col||^2 / E^2.
      for (Eigen::Index m = 0; m < m_tones; ++m) {
        std::vector<double> inv_gain(k);
        for (Eigen::Index l = 0; l < k; ++l) {
          double e2 = out.e(l, m) * out.e(l, m);
          inv_gain[l] = n0 > 0.0 ? n0 * raw_col_sq(l, m) / std::max(e2, 1e-30) : 0.0;
        }
        std::vector<Eigen::Index> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](auto a, auto b) { return inv_gain[a] < inv_gain[b]; });
        double budget = static_cast<double>(k);
        Eigen::Index active = k;
        double level = 0.0;
        while (active > 0) {
          double sum = 0.0;
          for (Eigen::Index i = 0; i < active; ++i) sum += inv_gain[order[i]];
          level = (budget + sum) / static_cast<double>(active);
          if (level > inv_gain[order[active - 1]]) break;
          --active;
        }
        for (Eigen::Index i = 0; i < k; ++i) {
          double p = i < active ? std::max(level - inv_gain[order[i]], 0.0) : 0.0;
          Eigen::Index l = order[i];
          out.beta(l, m) = std::sqrt(p / std::max(raw_col_sq(l, m), 1e-30));
        }
      }
      break;
    }
    case PowerPolicy::Inversion: {
      // Flat received amplitude per UE across its tones, per-UE budget M.
      for (Eigen::Index l = 0; l < k; ++l) {
        double denom = 0.0;
        for (Eigen::Index m = 0; m < m_tones; ++m) {
          double e2 = std::max(out.e(l, m) * out.e(l, m), 1e-12);
          denom += raw_col_sq(l, m) / e2;
        }
        double c = std::sqrt(static_cast<double>(m_tones) / std::max(denom, 1e-30));
        for (Eigen::Index m = 0; m < m_tones; ++m)
          out.beta(l, m) = c / std::max(out.e(l, m), 1e-6);
      }
      break;
    }
  }

  for (Eigen::Index m = 0; m < m_tones; ++m) {
    out.p[m] = raw[m];
    for (Eigen::Index l = 0; l < k; ++l) {
      out.p[m].col(l) *= out.beta(l, m);
      out.e_eff(l, m) = out.e(l, m) * out.beta(l, m);
    }
  }
  return out;
}

CMat precode_and_superpose(const std::vector<CVec>& spread_per_ue,
                           const PrecoderSet& prec,
                           const std::vector<AllocationMap>& allocs) {
  if (spread_per_ue.size() != static_cast<std::size_t>(prec.n_ue) ||
      allocs.size() != spread_per_ue.size())
    throw std::invalid_argument("precode_and_superpose: UE count mismatch");
  Eigen::Index n_grid = allocs[0].n_grid;
  CMat grid = CMat::Zero(prec.n_enb, n_grid);
  for (Eigen::Index i = 0; i < prec.n_ue; ++i) {
    const auto& alloc = allocs[i];
    if (spread_per_ue[i].size() != alloc.n_data || alloc.n_grid != n_grid)
      throw std::invalid_argument("precode_and_superpose: dimension mismatch");
    for (Eigen::Index m = 0; m < alloc.n_data; ++m)
      grid.col(alloc.tone_index[m]) += prec.ue_column(i, m) * spread_per_ue[i][m];
  }
  return grid;
}

CVec ue_post_process(const CVec& y_tones, const CVec& u_tones) {
  if (y_tones.size() != u_tones.size())
    throw std::invalid_argument("ue_post_process: length mismatch");
  return u_tones.conjugate().cwiseProduct(y_tones);
}

CVec mmse_equalize_diag(const CVec& y_tones, const CVec& gains, double n0) {
  if (y_tones.size() != gains.size())
    throw std::invalid_argument("mmse_equalize_diag: length mismatch");
  CVec out(y_tones.size());
  for (Eigen::Index m = 0; m < y_tones.size(); ++m) {
    double denom = std::norm(gains[m]) + n0;
    out[m] = denom > 0.0 ? std::conj(gains[m]) * y_tones[m] / denom : cplx(0.0, 0.0);
  }
  return out;
}

EnbTx build_enb_downlink_tx(const ScenarioConfig& cfg, const PrecoderSet& prec,
                            const AllocationMap& alloc, const QamMapper& mapper,
                            const std::vector<std::vector<std::uint8_t>>& bits_per_ue,
                            RngStream& tx_rng) {
  EnbTx tx;
  std::vector<AllocationMap> allocs(cfg.n_ue, alloc);
  for (Eigen::Index i = 0; i < cfg.n_ue; ++i)
    tx.spread_per_ue.push_back(dft_spread(mapper.map(bits_per_ue[i])));
  CMat grid = precode_and_superpose(tx.spread_per_ue, prec, allocs);
  const PaModel* pa = cfg.pa_enabled ? &cfg.pa : nullptr;
  for (Eigen::Index j = 0; j < cfg.n_enb_antennas; ++j) {
    CVec t = to_time_with_cp(grid.row(j).transpose(), cfg.cp_len, cfg.n_taps);
    tx.chains.push_back(make_tx_chain(t, pa, cfg.tx_noise_evm_db, tx_rng));
  }
  return tx;
}

}  // namespace fdsim
