#include "planted/planted.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <new>
#include <string>

#include "planted/detectors.hpp"
#include "planted/error.hpp"
#include "planted/io.hpp"
#include "planted/models.hpp"
#include "planted/moments.hpp"
#include "planted/parallel.hpp"
#include "planted/rng.hpp"
#include "planted/thresholds.hpp"

struct pl_instance {
  planted::PlantedInstance inner;
};

namespace {

using namespace planted;

thread_local std::string g_last_error;

template <class Body>
pl_status guard(Body&& body) {
  try {
    body();
    g_last_error.clear();
    return PL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<pl_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PL_ERR_INTERNAL;
  }
}

void not_null(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

// Bounds depend only on the shape parameters, so they skip the n checks.
ProblemParams to_cpp(const pl_params* p, bool check = true) {
  not_null(p, "params");
  ProblemParams out;
  switch (p->problem) {
    case PL_SPARSE_PCA: out = SparsePcaParams{p->snr, p->gamma, p->n}; break;
    case PL_SUBMATRIX: out = SubmatrixParams{p->snr, p->k, p->n}; break;
    case PL_CLUSTERING: out = ClusteringParams{p->snr, p->alpha, p->k, p->n}; break;
    default: fail(ErrorCode::kInvalidArgument, "unknown problem tag");
  }
  if (check) validate(out);
  return out;
}

pl_params to_c(const ProblemParams& params) {
  pl_params out{};
  out.problem = static_cast<int>(problem_of(params));
  out.snr = snr_of(params);
  if (const auto* p = std::get_if<SparsePcaParams>(&params)) {
    out.gamma = p->gamma;
    out.n = p->n;
  } else if (const auto* p = std::get_if<SubmatrixParams>(&params)) {
    out.k = p->k;
    out.n = p->n;
  } else {
    const auto& c = std::get<ClusteringParams>(params);
    out.alpha = c.alpha;
    out.k = c.k;
    out.n = c.n;
  }
  return out;
}

double reconstruction_overlap(const GroundTruth& estimate, const GroundTruth& truth) {
  if (const auto* v = std::get_if<SparseSignVector>(&estimate)) {
    const double o = vector_overlap(*v, std::get<SparseSignVector>(truth));
    return o * o;
  }
  if (const auto* s = std::get_if<BalancedPartition>(&estimate)) {
    return overlap_matrix(*s, std::get<BalancedPartition>(truth)).l2;
  }
  return overlap_matrix(std::get<ClusteringTruth>(estimate).partition,
                        std::get<ClusteringTruth>(truth).partition)
      .l2;
}

double correlation(const Matrix& a, const Matrix& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return (a.array() * b.array()).sum() / (na * nb);
}

void fill_moment(const MomentReport& r, pl_moment* out) {
  out->value = r.value;
  out->log_value = r.log_value;
  out->has_standard_error = r.standard_error.has_value();
  out->standard_error = r.standard_error.value_or(std::numeric_limits<double>::quiet_NaN());
  out->trials = r.trials.value_or(0);
}

}  // namespace

extern "C" {

const char* pl_last_error(void) { return g_last_error.c_str(); }

const char* pl_status_name(pl_status status) {
  switch (status) {
    case PL_OK: return "ok";
    case PL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PL_ERR_DOMAIN: return "domain error";
    case PL_ERR_INFEASIBLE: return "infeasible";
    case PL_ERR_IO: return "i/o error";
    case PL_ERR_NUMERIC: return "numerical failure";
    case PL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

pl_status pl_problem_parse(const char* name, int* problem) {
  return guard([&] {
    not_null(name, "name");
    not_null(problem, "problem");
    *problem = static_cast<int>(parse_problem(name));
  });
}

const char* pl_problem_name(int problem) {
  if (problem < 0 || problem > 2) return "unknown";
  return problem_name(static_cast<Problem>(problem));
}

uint64_t pl_substream_seed(uint64_t master, uint64_t index) {
  return Stream::substream(master, index).key();
}

pl_status pl_params_validate(const pl_params* params) {
  return guard([&] { to_cpp(params); });
}

pl_status pl_params_round(const pl_params* in, pl_params* out, char* note, size_t note_len) {
  return guard([&] {
    not_null(in, "params");
    not_null(out, "out");
    ProblemParams raw;
    switch (in->problem) {
      case PL_SPARSE_PCA: raw = SparsePcaParams{in->snr, in->gamma, in->n}; break;
      case PL_SUBMATRIX: raw = SubmatrixParams{in->snr, in->k, in->n}; break;
      case PL_CLUSTERING: raw = ClusteringParams{in->snr, in->alpha, in->k, in->n}; break;
      default: fail(ErrorCode::kInvalidArgument, "unknown problem tag");
    }
    std::string msg;
    const ProblemParams rounded = round_to_valid(raw, &msg);
    validate(rounded);
    *out = to_c(rounded);
    if (note && note_len > 0) {
      const std::size_t len = std::min(msg.size(), note_len - 1);
      std::memcpy(note, msg.data(), len);
      note[len] = '\0';
    }
  });
}

pl_status pl_bounds_compute(const pl_params* params, pl_bounds* out) {
  return guard([&] {
    not_null(out, "out");
    const BoundSet b = bounds_for(to_cpp(params, false));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    *out = {b.upper, b.lower_theorem, b.lower_psi.value_or(nan), b.lower_lambert.value_or(nan),
            b.spectral, b.lower_psi.has_value(), b.lower_lambert.has_value()};
  });
}

pl_status pl_bounds_json(const pl_params* params, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    const std::string json = bounds_to_json(bounds_for(to_cpp(params, false)));
    if (needed) *needed = json.size() + 1;
    if (buf == nullptr || cap == 0) return;
    require(cap > json.size(), ErrorCode::kInvalidArgument, "buffer too small");
    std::memcpy(buf, json.c_str(), json.size() + 1);
  });
}

pl_status pl_instance_generate(const pl_params* params, int hypothesis, uint64_t seed,
                               pl_instance** out) {
  return guard([&] {
    not_null(out, "out");
    require(hypothesis == PL_NULL || hypothesis == PL_PLANTED, ErrorCode::kInvalidArgument,
            "unknown hypothesis");
    auto inst = std::make_unique<pl_instance>();
    inst->inner = generate_instance(to_cpp(params), static_cast<Hypothesis>(hypothesis), seed);
    *out = inst.release();
  });
}

pl_status pl_instance_from_matrix(const pl_params* params, const double* data, int64_t rows,
                                  int64_t cols, pl_instance** out) {
  return guard([&] {
    not_null(data, "data");
    not_null(out, "out");
    const ProblemParams p = to_cpp(params);
    const auto [r, c] = observed_shape(p);
    require(rows == r && cols == c, ErrorCode::kInvalidArgument,
            "matrix shape does not match the parameters");
    auto inst = std::make_unique<pl_instance>();
    inst->inner.params = p;
    inst->inner.x = Eigen::Map<const Matrix>(data, rows, cols);
    *out = inst.release();
  });
}

void pl_instance_free(pl_instance* instance) { delete instance; }

pl_status pl_instance_shape(const pl_instance* instance, int64_t* rows, int64_t* cols) {
  return guard([&] {
    not_null(instance, "instance");
    if (rows) *rows = instance->inner.x.rows();
    if (cols) *cols = instance->inner.x.cols();
  });
}

const double* pl_instance_data(const pl_instance* instance) {
  return instance ? instance->inner.x.data() : nullptr;
}

pl_status pl_instance_info(const pl_instance* instance, pl_params* params, int* hypothesis,
                           uint64_t* seed) {
  return guard([&] {
    not_null(instance, "instance");
    if (params) *params = to_c(instance->inner.params);
    if (hypothesis) *hypothesis = static_cast<int>(instance->inner.hypothesis);
    if (seed) *seed = instance->inner.seed;
  });
}

pl_status pl_instance_save(const pl_instance* instance, const char* path) {
  return guard([&] {
    not_null(instance, "instance");
    not_null(path, "path");
    save_instance(instance->inner, path);
  });
}

pl_status pl_instance_load(const char* path, pl_instance** out) {
  return guard([&] {
    not_null(path, "path");
    not_null(out, "out");
    auto inst = std::make_unique<pl_instance>();
    inst->inner = load_instance(path);
    *out = inst.release();
  });
}

pl_status pl_instance_write_text(const pl_instance* instance, const char* path) {
  return guard([&] {
    not_null(instance, "instance");
    not_null(path, "path");
    std::ofstream out(path, std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::kIo, std::string("cannot open '") + path + "'");
    write_matrix_text(instance->inner.x, out);
    require(static_cast<bool>(out), ErrorCode::kIo, std::string("write to '") + path + "' failed");
  });
}

pl_status pl_detect(const pl_instance* instance, int detector, pl_detection* out) {
  return guard([&] {
    not_null(instance, "instance");
    not_null(out, "out");
    require(detector == PL_SPECTRAL || detector == PL_GLR, ErrorCode::kInvalidArgument,
            "unknown detector");
    const DetectionOutcome d = detector == PL_SPECTRAL
                                   ? spectral_detect(instance->inner.x, instance->inner.params)
                                   : glr_detect(instance->inner.x, instance->inner.params);
    *out = {d.statistic, d.threshold, static_cast<int>(d.decision),
            d.spectrally_indistinguishable, d.elapsed_seconds};
  });
}

pl_status pl_simulate_cell(const pl_params* params, int detector, int64_t trials, uint64_t seed,
                           int threads, int with_planted, int with_null, pl_cell_result* out) {
  return guard([&] {
    not_null(out, "out");
    const ProblemParams p = to_cpp(params);
    require(trials >= 1, ErrorCode::kInvalidArgument, "trials must be positive");
    require(detector == PL_SPECTRAL || detector == PL_GLR, ErrorCode::kInvalidArgument,
            "unknown detector");
    require(with_planted || with_null, ErrorCode::kInvalidArgument,
            "nothing to simulate: both hypotheses disabled");
    const bool glr = detector == PL_GLR;
    if (glr) {
      require(glr_search_space(p) <= kMaxSearch, ErrorCode::kInfeasible,
              "exhaustive search space exceeds 2e8 candidates");
    }
    const double threshold = glr ? glr_threshold(p) : 0.0;

    struct Slot {
      double hit = 0.0, false_alarm = 0.0, overlap = 0.0, corr = 0.0;
    };
    std::vector<Slot> slots(trials);
    auto run = [&](const Matrix& x, GroundTruth* estimate) {
      if (glr) {
        GlrResult r = glr_search(x, p);
        if (estimate) *estimate = std::move(r.best_truth);
        return r.best_statistic >= threshold;
      }
      const bool hit = spectral_detect(x, p).decision == Hypothesis::kPlanted;
      if (estimate) *estimate = pca_reconstruct(x, p).estimate;
      return hit;
    };
    parallel_for(trials, threads, [&](std::int64_t t) {
      Slot& s = slots[t];
      if (with_planted) {
        const PlantedInstance inst = generate_instance(
            p, Hypothesis::kPlanted, Stream::substream(seed, 2 * static_cast<std::uint64_t>(t)).key());
        GroundTruth estimate;
        s.hit = run(inst.x, &estimate) ? 1.0 : 0.0;
        s.overlap = reconstruction_overlap(estimate, *inst.truth);
        s.corr = correlation(build_signal(p, estimate), build_signal(p, *inst.truth));
      }
      if (with_null) {
        const PlantedInstance inst = generate_instance(
            p, Hypothesis::kNull, Stream::substream(seed, 2 * static_cast<std::uint64_t>(t) + 1).key());
        s.false_alarm = run(inst.x, nullptr) ? 1.0 : 0.0;
      }
    });
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double hit = 0.0, fa = 0.0, ov = 0.0, corr = 0.0;
    for (const Slot& s : slots) {
      hit += s.hit;
      fa += s.false_alarm;
      ov += s.overlap;
      corr += s.corr;
    }
    const double n = static_cast<double>(trials);
    out->detect_rate_planted = with_planted ? hit / n : nan;
    out->false_positive_rate_null = with_null ? fa / n : nan;
    out->mean_overlap = with_planted ? ov / n : nan;
    out->mean_signal_correlation = with_planted ? corr / n : nan;
    out->trials = trials;
  });
}

pl_status pl_second_moment_exact(const pl_params* params, pl_moment* out) {
  return guard([&] {
    not_null(out, "out");
    const ProblemParams p = to_cpp(params);
    if (const auto* s = std::get_if<SparsePcaParams>(&p)) {
      fill_moment(second_moment_sparse_pca(*s), out);
    } else if (const auto* s = std::get_if<SubmatrixParams>(&p)) {
      fill_moment(second_moment_submatrix(*s), out);
    } else {
      fail(ErrorCode::kInfeasible,
           "no exact second moment for clustering; use the Monte Carlo method");
    }
  });
}

pl_status pl_second_moment_mc(const pl_params* params, int64_t trials, uint64_t seed,
                              int threads, pl_moment* out) {
  return guard([&] {
    not_null(out, "out");
    fill_moment(second_moment_mc(to_cpp(params), trials, seed, threads), out);
  });
}

pl_status pl_mmse_curve(const pl_params* params, const double* betas, size_t count,
                        int64_t trials, uint64_t seed, int threads, pl_mmse_row* out) {
  return guard([&] {
    not_null(betas, "betas");
    not_null(out, "out");
    const auto rows =
        mmse_curve(to_cpp(params), std::vector<double>(betas, betas + count), trials, seed, threads);
    for (std::size_t i = 0; i < count; ++i) {
      const MmseReport& r = rows[i];
      out[i] = {r.beta,      r.mmse,        r.se_mmse,        r.posterior_norm,
                r.se_posterior_norm, r.mutual_info, r.se_mutual_info, r.trials};
    }
  });
}

}  // extern "C"
