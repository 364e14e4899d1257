#include "opelab/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "opelab/errors.hpp"
#include "opelab/model_io.hpp"
#include "opelab/rng.hpp"

namespace opelab {

namespace {

constexpr const char* kFormat = "opelab-trajectories/1";

struct RowView {
    const double* p;
    double operator()(int i) const { return p[i]; }
};

Trajectory sample_one(const TabularPOMDP& m, const MemorylessPolicy& pi_b, Rng& rng, bool keep_latent) {
    const int H = m.horizon(), S = m.state_count(), O = m.obs_count(), A = m.action_count();
    Trajectory t;
    t.obs.resize(H), t.acts.resize(H), t.rews.resize(H), t.bprobs.resize(H);
    if (keep_latent) t.latent.resize(H);
    std::vector<double> buf(std::max({S, O, A}));
    auto draw = [&](int n, auto prob) {
        for (int i = 0; i < n; ++i) buf[i] = prob(i);
        return rng.categorical(RowView{buf.data()}, n);
    };
    int s = draw(S, [&](int i) { return m.initial(i); });
    for (int h = 0; h < H; ++h) {
        const int o = draw(O, [&](int i) { return m.emission(h, s, i); });
        const int a = draw(A, [&](int i) { return pi_b.prob(h, o, i); });
        t.obs[h] = o, t.acts[h] = a;
        t.rews[h] = m.reward(h, o, a);
        t.bprobs[h] = pi_b.prob(h, o, a);
        if (keep_latent) t.latent[h] = s;
        if (h + 1 < H) s = draw(S, [&](int i) { return m.transition(h, s, a, i); });
    }
    return t;
}

Json trajectory_json(const Trajectory& t) {
    Json j{{"obs", t.obs}, {"acts", t.acts}, {"rews", t.rews}, {"bprobs", t.bprobs}};
    if (!t.latent.empty()) j["latent"] = t.latent;
    return j;
}

}  // namespace

ObservedView::ObservedView(const TrajectoryDataset& d, std::size_t prefix) : data_(&d), n_(prefix) {
    if (prefix > d.size()) throw ConfigError("view prefix exceeds the dataset size");
}

TrajectoryDataset sample_dataset(const TabularPOMDP& model, const MemorylessPolicy& pi_b, std::size_t n,
                                 std::uint64_t root_seed, const SampleOptions& options) {
    if (n == 0) throw ConfigError("sample size must be at least 1");
    TrajectoryDataset d;
    d.fingerprint = model_fingerprint(model);
    d.seed = root_seed;
    d.horizon = model.horizon();
    d.trajectories.resize(n);
    const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.threads, 1)), 1, n);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng(root_seed, i);
            d.trajectories[i] = sample_one(model, pi_b, rng, options.keep_latent);
        }
    };
    if (workers == 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, n * w / workers, n * (w + 1) / workers);
        for (auto& t : pool) t.join();
    }
    return d;
}

std::string dataset_to_jsonl(const TrajectoryDataset& d) {
    std::ostringstream os;
    os << Json{{"format", kFormat},
               {"fingerprint", fingerprint_hex(d.fingerprint)},
               {"seed", d.seed},
               {"n", d.size()},
               {"H", d.horizon}}
              .dump()
       << '\n';
    for (const Trajectory& t : d.trajectories) os << trajectory_json(t).dump() << '\n';
    return os.str();
}

void write_dataset(const std::string& path, const TrajectoryDataset& d) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << dataset_to_jsonl(d);
    if (!out) throw ConfigError("write to '" + path + "' failed");
}

TrajectoryDataset dataset_from_jsonl(const std::string& text, const TabularPOMDP* model) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto parse = [&](const std::string& s) {
        try {
            return Json::parse(s);
        } catch (const Json::parse_error& e) {
            throw ParseError("line " + std::to_string(lineno) + " is not valid JSON: " + e.what(), lineno);
        }
    };

    if (!std::getline(in, line)) throw ParseError("dataset is empty", 1);
    ++lineno;
    const Json header = parse(line);
    TrajectoryDataset d;
    std::size_t n = 0;
    try {
        if (header.at("format").get<std::string>() != kFormat) throw ParseError("unsupported dataset format", 1);
        d.fingerprint = std::stoull(header.at("fingerprint").get<std::string>(), nullptr, 16);
        d.seed = header.at("seed").get<std::uint64_t>();
        n = header.at("n").get<std::size_t>();
        d.horizon = header.at("H").get<int>();
    } catch (const Json::exception& e) {
        throw ParseError(std::string("bad dataset header: ") + e.what(), 1);
    } catch (const std::logic_error&) {
        throw ParseError("bad dataset fingerprint", 1);
    }
    if (model != nullptr && model_fingerprint(*model) != d.fingerprint)
        throw ModelError("dataset fingerprint " + fingerprint_hex(d.fingerprint) + " does not match the model (" +
                         fingerprint_hex(model_fingerprint(*model)) + "); it was sampled from a different model");

    const auto H = static_cast<std::size_t>(d.horizon);
    d.trajectories.reserve(n);
    while (d.trajectories.size() < n) {
        if (!std::getline(in, line))
            throw ParseError("dataset truncated: expected " + std::to_string(n) + " trajectories, found " +
                                 std::to_string(d.trajectories.size()),
                             lineno + 1);
        ++lineno;
        const Json j = parse(line);
        Trajectory t;
        try {
            for (const auto& [key, _] : j.items())
                if (key != "obs" && key != "acts" && key != "rews" && key != "bprobs" && key != "latent")
                    throw ParseError("line " + std::to_string(lineno) + " has unknown field '" + key + "'", lineno);
            t.obs = j.at("obs").get<std::vector<int>>();
            t.acts = j.at("acts").get<std::vector<int>>();
            t.rews = j.at("rews").get<std::vector<double>>();
            t.bprobs = j.at("bprobs").get<std::vector<double>>();
            if (j.contains("latent")) t.latent = j.at("latent").get<std::vector<int>>();
        } catch (const Json::exception& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
        if (t.obs.size() != H || t.acts.size() != H || t.rews.size() != H || t.bprobs.size() != H ||
            !(t.latent.empty() || t.latent.size() == H))
            throw ParseError("line " + std::to_string(lineno) + " does not have H entries per field", lineno);
        d.trajectories.push_back(std::move(t));
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty()) throw ParseError("unexpected content after the last trajectory", lineno);
    }
    return d;
}

TrajectoryDataset read_dataset(const std::string& path, const TabularPOMDP* model) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return dataset_from_jsonl(os.str(), model);
}

}  // namespace opelab
