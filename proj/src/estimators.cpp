#include "opelab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "opelab/errors.hpp"
#include "opelab/exact.hpp"
#include "opelab/fdvf.hpp"
#include "opelab/rng.hpp"
#include "opelab/simulator.hpp"

namespace opelab {

namespace {

/// Splits a trajectory id into its per-step future and history ids.
void split_ids(SampleSet& s, Id trajectory, const SequenceSpace& space) {
    for (int h = 0; h < space.horizon; ++h) {
        const Id nf = space.future_count(h);
        s.future.push_back(trajectory % nf);
        s.history.push_back(trajectory / nf);
    }
}

/// g_V(i, h) = mu (r + V(f_{h+1})) - V(f_h), laid out like the sample tables.
std::vector<double> residual_table(const SampleSet& s, const StepFunction& v) {
    const int H = s.horizon;
    std::vector<double> g(s.size() * H);
    for (std::size_t i = 0; i < s.size(); ++i)
        for (int h = 0; h < H; ++h) {
            const std::size_t k = i * H + h;
            const double next = h + 1 < H ? v(h + 1, s.future[k + 1]) : 0.0;
            g[k] = s.mu[k] * (s.rew[k] + next) - v(h, s.future[k]);
        }
    return g;
}

std::vector<double> history_table(const SampleSet& s, const StepFunction& f) {
    std::vector<double> out(s.size() * s.horizon);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(static_cast<int>(k % s.horizon), s.history[k]);
    return out;
}

/// Weighted per-step means of x over samples [begin, end), normalized by the block weight.
std::vector<double> step_means(const SampleSet& s, const std::vector<double>& x, std::size_t begin, std::size_t end) {
    const int H = s.horizon;
    std::vector<double> m(H, 0.0);
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        total += s.weight[i];
        for (int h = 0; h < H; ++h) m[h] += s.weight[i] * x[i * H + h];
    }
    if (total > 0.0)
        for (double& v : m) v /= total;
    return m;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

void require_nonempty(const FunctionClass& c, const char* what) {
    if (c.members.empty()) throw ConfigError(std::string(what) + " class is empty");
}

double sum(const std::vector<double>& v) {
    double t = 0.0;
    for (double x : v) t += x;
    return t;
}

}  // namespace

SampleSet samples_from_view(const ObservedView& view, const SequenceSpace& space, const MemorylessPolicy& pi_e) {
    const int H = space.horizon;
    if (view.horizon() != H) throw ConfigError("dataset horizon does not match the model");
    if (view.size() == 0) throw ConfigError("dataset is empty");
    SampleSet s;
    s.horizon = H;
    s.uniform_weights = true;
    const double w = 1.0 / static_cast<double>(view.size());
    for (std::size_t i = 0; i < view.size(); ++i) {
        Id id = 0;
        for (int h = 0; h < H; ++h) {
            const int o = view.obs(i, h), a = view.act(i, h);
            if (o < 0 || o >= space.observations || a < 0 || a >= space.actions)
                throw EncodingError("trajectory " + std::to_string(i) + " has an out-of-range symbol at step " +
                                    std::to_string(h + 1));
            id = id * space.pair_count() + space.pair_code(o, a);
            const double pe = pi_e.prob(h, o, a), pb = view.bprob(i, h);
            if (pb <= 0.0 && pe > 0.0)
                throw ActionCoverageError("trajectory " + std::to_string(i) + " logs pi_b = 0 at step " +
                                          std::to_string(h + 1) + " for an action pi_e plays");
            s.mu.push_back(pe > 0.0 ? pe / pb : 0.0);
            s.rew.push_back(view.rew(i, h));
        }
        s.weight.push_back(w);
        split_ids(s, id, space);
    }
    return s;
}

SampleSet population_samples(const ExactAnalysis& ex) {
    const SequenceSpace space = ex.space();
    const int H = space.horizon;
    SampleSet s;
    s.horizon = H;
    s.uniform_weights = false;
    for (Eigen::Index t = 0; t < ex.trajectory_prob_b.size(); ++t) {
        const double p = ex.trajectory_prob_b(t);
        if (!(p > 0.0)) continue;
        s.weight.push_back(p);
        const Sequence seq = decode_future(space, FutureIndex{0, static_cast<Id>(t)});
        for (int h = 0; h < H; ++h) {
            s.mu.push_back(action_ratio(ex.pi_e, ex.pi_b, h, seq[h].obs, seq[h].act));
            s.rew.push_back(ex.model.reward(h, seq[h].obs, seq[h].act));
        }
        split_ids(s, static_cast<Id>(t), space);
    }
    return s;
}

double FunctionClass::sup_norm() const {
    double m = 0.0;
    for (const StepFunction& f : members) m = std::max(m, f.sup_norm());
    return m;
}

FunctionClasses build_classes(const ExactAnalysis& ex, const ClassSpec& spec) {
    if (spec.perturbations < 0) throw ConfigError("perturbation count must be non-negative");
    Rng rng(spec.seed, 0x636c61737365ULL);
    auto perturbed = [&](const std::vector<Eigen::VectorXd>& theta) {
        std::vector<Eigen::VectorXd> out = theta;
        for (Eigen::VectorXd& t : out)
            for (Eigen::Index k = 0; k < t.size(); ++k) {
                const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                t(k) += spec.magnitude * sign * (0.5 + 0.5 * rng.uniform());
            }
        return out;
    };

    FunctionClasses c;
    c.v.domain = Domain::Futures;
    c.xi.domain = c.w.domain = Domain::Histories;

    const FdvfSolution vf = construct_reward_weighted_fdvf(ex);
    const LinearForm& vform = *vf.value.linear_form();
    c.v.members.push_back(vf.value);
    for (int j = 0; j < spec.perturbations; ++j)
        c.v.members.push_back(StepFunction::linear(ex, Domain::Futures, {vform.kind, perturbed(vform.theta), {}}));
    for (const StepFunction& v : c.v.members)
        c.xi.members.push_back(StepFunction::dense(Domain::Histories, bellman_residual_H(ex, v)));

    const HistoryWeights ws = construct_history_weights(ex);
    const LinearForm& wform = *ws.weights.linear_form();
    c.w.members.push_back(ws.weights);
    for (int j = 0; j < spec.perturbations; ++j)
        c.w.members.push_back(StepFunction::linear(ex, Domain::Histories, {wform.kind, perturbed(wform.theta), {}}));
    return c;
}

int default_mom_blocks(std::size_t n, double delta) {
    const double k = std::ceil(8.0 * std::log(2.0 / delta));
    return static_cast<int>(std::min<double>(static_cast<double>(n), k));
}

double plug_in_estimate(const SampleSet& s, const StepFunction& v) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) total += s.weight[i] * v(0, s.future[i * s.horizon]);
    return total;
}

double is_estimate(const SampleSet& s, IsMode mode) {
    const int H = s.horizon;
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double ratio = 1.0, value = 0.0, ret = 0.0;
        for (int h = 0; h < H; ++h) {
            ratio *= s.mu[i * H + h];
            ret += s.rew[i * H + h];
            value += ratio * s.rew[i * H + h];
        }
        total += s.weight[i] * (mode == IsMode::FullTrajectory ? ratio * ret : value);
    }
    return total;
}

EstimateReport minimax_fdvf_estimate(const SampleSet& s, const FunctionClass& vclass, const FunctionClass& xiclass) {
    require_nonempty(vclass, "value");
    require_nonempty(xiclass, "test-function");
    std::vector<std::vector<double>> xis;
    for (const StepFunction& xi : xiclass.members) xis.push_back(history_table(s, xi));

    EstimateReport r;
    r.method = "minimax";
    r.n = s.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < vclass.members.size(); ++j) {
        const std::vector<double> g = residual_table(s, vclass.members[j]);
        double worst = -std::numeric_limits<double>::infinity();
        int arg = -1;
        std::vector<double> worst_steps;
        for (std::size_t k = 0; k < xis.size(); ++k) {
            std::vector<double> term(g.size());
            for (std::size_t q = 0; q < g.size(); ++q) term[q] = g[q] * xis[k][q] - 0.5 * xis[k][q] * xis[k][q];
            const std::vector<double> steps = step_means(s, term, 0, s.size());
            const double loss = sum(steps);
            if (loss > worst) worst = loss, arg = static_cast<int>(k), worst_steps = steps;
        }
        r.objective.push_back(worst);
        if (worst < best) {
            best = worst;
            r.v_index = static_cast<int>(j);
            r.aux_index = arg;
            r.step_losses = worst_steps;
        }
    }
    r.estimate = plug_in_estimate(s, vclass.members[r.v_index]);
    return r;
}

EstimateReport mis_estimate(const SampleSet& s, const FunctionClass& vclass, const FunctionClass& wclass,
                            const std::optional<MomOptions>& mom) {
    require_nonempty(vclass, "value");
    require_nonempty(wclass, "weight");
    const int H = s.horizon;
    int blocks = 1;
    if (mom) {
        if (!s.uniform_weights) throw ConfigError("median-of-means needs an unweighted dataset");
        blocks = mom->blocks > 0 ? mom->blocks : default_mom_blocks(s.size(), mom->delta);
        if (static_cast<std::size_t>(blocks) > s.size())
            throw ConfigError("median-of-means block count " + std::to_string(blocks) + " exceeds n = " +
                              std::to_string(s.size()));
    }
    std::vector<std::vector<double>> ws;
    for (const StepFunction& w : wclass.members) ws.push_back(history_table(s, w));

    EstimateReport r;
    r.method = mom ? "mis-mom" : "mis";
    r.n = s.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < vclass.members.size(); ++j) {
        const std::vector<double> g = residual_table(s, vclass.members[j]);
        double worst = -std::numeric_limits<double>::infinity();
        int arg = -1;
        std::vector<double> worst_steps;
        for (std::size_t k = 0; k < ws.size(); ++k) {
            std::vector<double> term(g.size());
            for (std::size_t q = 0; q < g.size(); ++q) term[q] = ws[k][q] * g[q];
            std::vector<double> steps;
            if (blocks == 1) {
                steps = step_means(s, term, 0, s.size());
            } else {
                std::vector<std::vector<double>> per_block;
                for (int b = 0; b < blocks; ++b)
                    per_block.push_back(step_means(s, term, s.size() * b / blocks, s.size() * (b + 1) / blocks));
                steps.assign(H, 0.0);
                for (int h = 0; h < H; ++h) {
                    std::vector<double> col;
                    for (const auto& m : per_block) col.push_back(m[h]);
                    steps[h] = median(std::move(col));
                }
            }
            double loss = 0.0;
            for (double x : steps) loss += std::abs(x);
            if (loss > worst) worst = loss, arg = static_cast<int>(k), worst_steps = steps;
        }
        r.objective.push_back(worst);
        if (worst < best) {
            best = worst;
            r.v_index = static_cast<int>(j);
            r.aux_index = arg;
            r.step_losses = worst_steps;
        }
    }
    r.estimate = plug_in_estimate(s, vclass.members[r.v_index]);
    return r;
}

RealizabilitySurrogates realizability_surrogates(const ExactAnalysis& ex, const FunctionClass& vclass,
                                                const FunctionClass& wclass) {
    require_nonempty(vclass, "value");
    require_nonempty(wclass, "weight");
    const int H = ex.horizon();
    std::vector<std::vector<Eigen::VectorXd>> residuals;  // d^b-weighted B^H V per member
    for (const StepFunction& v : vclass.members) {
        auto bh = bellman_residual_H(ex, v);
        for (int h = 0; h < H; ++h) bh[h] = bh[h].cwiseProduct(ex.steps[h].history_marginal_b);
        residuals.push_back(std::move(bh));
    }
    auto pairing = [&](const std::vector<Eigen::VectorXd>& weighted, const StepFunction& w) {
        double t = 0.0;
        for (int h = 0; h < H; ++h) t += weighted[h].dot(w.table(h));
        return t;
    };

    RealizabilitySurrogates out;
    out.eps_v = std::numeric_limits<double>::infinity();
    for (const auto& res : residuals) {
        double worst = 0.0;
        for (const StepFunction& w : wclass.members) worst = std::max(worst, std::abs(pairing(res, w)));
        out.eps_v = std::min(out.eps_v, worst);
    }

    const StepFunction wstar = construct_history_weights(ex).weights;
    out.eps_w = std::numeric_limits<double>::infinity();
    for (const StepFunction& w : wclass.members) {
        double worst = 0.0;
        for (const auto& res : residuals) worst = std::max(worst, std::abs(pairing(res, wstar) - pairing(res, w)));
        out.eps_w = std::min(out.eps_w, worst);
    }
    return out;
}

}  // namespace opelab
