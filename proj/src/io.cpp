#include "rcp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rcp/estimators.hpp"

namespace rcp {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string kind_name(TerminalKind k) {
    switch (k) {
        case TerminalKind::none: return "none";
        case TerminalKind::goal: return "goal";
        case TerminalKind::timeout: return "timeout";
    }
    return "?";
}

TerminalKind parse_kind(const std::string& s, const std::string& where) {
    if (s == "none") return TerminalKind::none;
    if (s == "goal") return TerminalKind::goal;
    if (s == "timeout") return TerminalKind::timeout;
    throw FormatError(where + ": bad terminal kind '" + s + "'");
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw FormatError(where + ": bad number '" + s + "'");
        return v;
    } catch (const FormatError&) {
        throw;
    } catch (...) {
        throw FormatError(where + ": bad number '" + s + "'");
    }
}

long parse_long(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw FormatError(where + ": bad integer '" + s + "'");
        return v;
    } catch (const FormatError&) {
        throw;
    } catch (...) {
        throw FormatError(where + ": bad integer '" + s + "'");
    }
}

}  // namespace

void atomic_write_text(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw IoError("cannot write file: " + tmp);
        f << text;
        if (!f) throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + tmp + " -> " + path);
}

std::size_t Dataset::transition_count() const {
    std::size_t n = 0;
    for (const auto& t : trajectories) n += t.length();
    return n;
}

double Dataset::mean_trajectory_return(double gamma) const {
    require(!trajectories.empty(), "dataset: no trajectories");
    double sum = 0.0;
    for (const auto& t : trajectories) sum += reward_to_go(t.rewards, gamma)[0];
    return sum / double(trajectories.size());
}

void write_dataset(const std::string& path, const EnvSpec& env,
                   const std::vector<TrajectoryRecord>& trajectories) {
    std::ostringstream out;
    out << "rcpdata,1," << env.name << "," << env.obs_dim << ","
        << (env.kind == ActionKind::continuous ? "continuous" : "discrete") << "," << env.act_dim
        << "\n";
    long traj_id = 0;
    for (const auto& traj : trajectories) {
        for (std::size_t t = 0; t < traj.length(); ++t) {
            out << traj_id << "," << t;
            for (double v : traj.obs[t]) out << "," << fmt(v);
            if (env.kind == ActionKind::continuous)
                for (double v : traj.actions[t].c) out << "," << fmt(v);
            else
                out << "," << traj.actions[t].d;
            out << "," << fmt(traj.rewards[t]) << ","
                << kind_name(t + 1 == traj.length() ? traj.end : TerminalKind::none) << "\n";
        }
        ++traj_id;
    }
    atomic_write_text(path, out.str());
}

Dataset read_dataset(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read dataset: " + path);
    std::string line;
    if (!std::getline(f, line)) throw FormatError(path + ": empty file (missing header)");
    auto head = split(line);
    if (head.size() != 6 || head[0] != "rcpdata")
        throw FormatError(path + ":1: not a dataset file (bad header)");
    if (head[1] != "1") throw FormatError(path + ":1: unsupported version " + head[1]);

    Dataset ds;
    ds.env_name = head[2];
    ds.obs_dim = int(parse_long(head[3], path + ":1"));
    if (head[4] == "continuous")
        ds.kind = ActionKind::continuous;
    else if (head[4] == "discrete")
        ds.kind = ActionKind::discrete;
    else
        throw FormatError(path + ":1: bad action kind '" + head[4] + "'");
    ds.act_dim = int(parse_long(head[5], path + ":1"));

    const std::size_t action_cols = ds.kind == ActionKind::continuous ? std::size_t(ds.act_dim) : 1;
    const std::size_t expect = 2 + std::size_t(ds.obs_dim) + action_cols + 2;

    long cur_id = -1;
    long expect_step = 0;
    TrajectoryRecord cur;
    cur.has_final_obs = false;
    auto flush = [&](const std::string& where) {
        if (cur_id < 0) return;
        if (cur.end == TerminalKind::none)
            throw FormatError(where + ": trajectory " + std::to_string(cur_id) +
                              " has no goal/timeout end marker");
        ds.trajectories.push_back(std::move(cur));
        cur = TrajectoryRecord{};
        cur.has_final_obs = false;
    };

    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        auto cols = split(line);
        if (cols.size() != expect)
            throw FormatError(where + ": expected " + std::to_string(expect) + " columns, got " +
                              std::to_string(cols.size()));
        const long id = parse_long(cols[0], where);
        const long step = parse_long(cols[1], where);
        if (id != cur_id) {
            flush(where);
            cur_id = id;
            expect_step = 0;
            cur.end = TerminalKind::none;
        }
        if (step != expect_step)
            throw FormatError(where + ": step indices not contiguous (expected " +
                              std::to_string(expect_step) + ")");
        ++expect_step;

        Vector obs(std::size_t(ds.obs_dim));
        for (int i = 0; i < ds.obs_dim; ++i) obs[std::size_t(i)] = parse_double(cols[2 + i], where);
        Action a;
        std::size_t off = 2 + std::size_t(ds.obs_dim);
        if (ds.kind == ActionKind::continuous) {
            a.c.resize(std::size_t(ds.act_dim));
            for (int i = 0; i < ds.act_dim; ++i) a.c[std::size_t(i)] = parse_double(cols[off + i], where);
            off += std::size_t(ds.act_dim);
        } else {
            a.d = int(parse_long(cols[off], where));
            off += 1;
        }
        const double reward = parse_double(cols[off], where);
        const TerminalKind kind = parse_kind(cols[off + 1], where);

        cur.obs.push_back(std::move(obs));
        cur.actions.push_back(std::move(a));
        cur.rewards.push_back(reward);
        if (kind != TerminalKind::none) cur.end = kind;
    }
    flush(path + ": <eof>");
    return ds;
}

std::string metrics_header() {
    return "iteration,eval_return_mean,eval_return_max,mu_z,sigma_z,policy_loss,value_loss,"
           "buffer_size";
}

std::string metrics_row(const IterationMetrics& m) {
    std::ostringstream out;
    out << m.iteration << "," << fmt(m.eval_return_mean) << "," << fmt(m.eval_return_max) << ","
        << fmt(m.mu_z) << "," << fmt(m.sigma_z) << "," << fmt(m.policy_loss_mean) << ","
        << fmt(m.value_loss_mean) << "," << m.buffer_size;
    return out.str();
}

void write_metrics(const std::string& path, const std::vector<IterationMetrics>& rows) {
    std::string text = metrics_header() + "\n";
    for (const auto& m : rows) text += metrics_row(m) + "\n";
    atomic_write_text(path, text);
}

void write_diagnostics(const std::string& path, const std::vector<DiagPair>& pairs) {
    std::string text = "iteration,commanded,observed\n";
    for (const auto& p : pairs)
        text += std::to_string(p.iteration) + "," + fmt(p.commanded) + "," + fmt(p.observed) + "\n";
    atomic_write_text(path, text);
}

std::vector<DiagPair> read_diagnostics(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read diagnostics: " + path);
    std::string line;
    if (!std::getline(f, line) || line != "iteration,commanded,observed")
        throw FormatError(path + ":1: not a diagnostics file");
    std::vector<DiagPair> out;
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        auto cols = split(line);
        if (cols.size() != 3) throw FormatError(where + ": expected 3 columns");
        out.push_back({int(parse_long(cols[0], where)), parse_double(cols[1], where),
                       parse_double(cols[2], where)});
    }
    return out;
}

// ---- checkpoints ----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'R', 'C', 'P', 'C', 'K', 'P', 'T', '1'};

void put_i64(std::string& out, std::int64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
}

void put_f64(std::string& out, double v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
}

void put_dense(std::string& out, const DenseParams& p) {
    put_i64(out, p.layers());
    for (int l = 0; l < p.layers(); ++l) {
        put_i64(out, p.w[l].rows);
        put_i64(out, p.w[l].cols);
        for (double v : p.w[l].a) put_f64(out, v);
        for (double v : p.b[l]) put_f64(out, v);
    }
}

struct Reader {
    std::string data;
    std::size_t pos = 0;
    std::string path;

    void need(std::size_t n) const {
        if (pos + n > data.size()) throw FormatError(path + ": truncated checkpoint");
    }
    std::int64_t i64() {
        need(8);
        std::int64_t v;
        std::memcpy(&v, data.data() + pos, 8);
        pos += 8;
        return v;
    }
    double f64() {
        need(8);
        double v;
        std::memcpy(&v, data.data() + pos, 8);
        pos += 8;
        return v;
    }
    DenseParams dense() {
        DenseParams p;
        const std::int64_t layers = i64();
        if (layers < 1 || layers > 64) throw FormatError(path + ": bad layer count");
        for (std::int64_t l = 0; l < layers; ++l) {
            const std::int64_t rows = i64(), cols = i64();
            if (rows < 1 || cols < 1 || rows * cols > (1LL << 30))
                throw FormatError(path + ": bad layer shape");
            Matrix w(static_cast<int>(rows), static_cast<int>(cols));
            for (double& v : w.a) v = f64();
            Vector b(static_cast<std::size_t>(rows));
            for (double& v : b) v = f64();
            p.w.push_back(std::move(w));
            p.b.push_back(std::move(b));
        }
        return p;
    }
};

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& c) {
    std::string out(kMagic, 8);
    put_i64(out, std::int64_t(c.algorithm));
    put_i64(out, std::int64_t(c.policy.mode));
    put_i64(out, std::int64_t(c.policy.kind));
    put_i64(out, c.policy.obs_dim);
    put_i64(out, c.policy.act_dim);
    put_i64(out, c.policy.width);
    put_i64(out, c.policy.embed_width);
    put_f64(out, c.policy.act_low);
    put_f64(out, c.policy.act_high);
    put_dense(out, c.policy.trunk);
    put_i64(out, std::int64_t(c.policy.log_std.size()));
    for (double v : c.policy.log_std) put_f64(out, v);
    put_i64(out, c.policy.mode == CondMode::multiply ? 1 : 0);
    if (c.policy.mode == CondMode::multiply) put_dense(out, c.policy.z_embed);
    put_i64(out, c.has_value ? 1 : 0);
    if (c.has_value) put_dense(out, c.value);
    put_f64(out, c.target.mu);
    put_f64(out, c.target.sigma);
    put_f64(out, c.target.tau_s);
    put_f64(out, c.target.sigma_min);
    put_f64(out, c.target.beta);
    put_f64(out, c.target.tau_rel);
    put_f64(out, c.target.sigma_min_rel);
    put_f64(out, c.normalizer.mean);
    put_f64(out, c.normalizer.stddev);
    atomic_write_text(path, out);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read checkpoint: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    Reader r{ss.str(), 0, path};
    r.need(8);
    if (std::memcmp(r.data.data(), kMagic, 8) != 0)
        throw FormatError(path + ": not a checkpoint file");
    r.pos = 8;

    Checkpoint c;
    c.algorithm = Algorithm(r.i64());
    c.policy.mode = CondMode(r.i64());
    c.policy.kind = ActionKind(r.i64());
    c.policy.obs_dim = int(r.i64());
    c.policy.act_dim = int(r.i64());
    c.policy.width = int(r.i64());
    c.policy.embed_width = int(r.i64());
    c.policy.act_low = r.f64();
    c.policy.act_high = r.f64();
    c.policy.trunk = r.dense();
    const std::int64_t ls = r.i64();
    c.policy.log_std.resize(std::size_t(ls));
    for (double& v : c.policy.log_std) v = r.f64();
    if (r.i64() == 1) c.policy.z_embed = r.dense();
    c.has_value = r.i64() == 1;
    if (c.has_value) c.value = r.dense();
    c.target.mu = r.f64();
    c.target.sigma = r.f64();
    c.target.tau_s = r.f64();
    c.target.sigma_min = r.f64();
    c.target.beta = r.f64();
    c.target.tau_rel = r.f64();
    c.target.sigma_min_rel = r.f64();
    c.normalizer.mean = r.f64();
    c.normalizer.stddev = r.f64();
    c.policy.trunk.check_shapes();
    if (c.policy.mode == CondMode::multiply) c.policy.z_embed.check_shapes();
    return c;
}

// ---- heatmap ----------------------------------------------------------------

double pearson_correlation(const std::vector<DiagPair>& pairs) {
    require(pairs.size() >= 2, "pearson: need at least two pairs");
    double mx = 0.0, my = 0.0;
    for (const auto& p : pairs) {
        mx += p.commanded;
        my += p.observed;
    }
    mx /= double(pairs.size());
    my /= double(pairs.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& p : pairs) {
        const double dx = p.commanded - mx, dy = p.observed - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

Heatmap bin_pairs(const std::vector<DiagPair>& pairs, int bins) {
    require(!pairs.empty(), "heatmap: no pairs");
    require(bins >= 1, "heatmap: bins must be >= 1");
    double xlo = pairs[0].commanded, xhi = xlo, ylo = pairs[0].observed, yhi = ylo;
    for (const auto& p : pairs) {
        xlo = std::min(xlo, p.commanded);
        xhi = std::max(xhi, p.commanded);
        ylo = std::min(ylo, p.observed);
        yhi = std::max(yhi, p.observed);
    }
    if (xhi == xlo) {
        xlo -= 0.5;
        xhi += 0.5;
    }
    if (yhi == ylo) {
        ylo -= 0.5;
        yhi += 0.5;
    }

    Heatmap h;
    h.pearson = pairs.size() >= 2 ? pearson_correlation(pairs) : 0.0;
    h.x_edges.resize(std::size_t(bins) + 1);
    h.y_edges.resize(std::size_t(bins) + 1);
    for (int i = 0; i <= bins; ++i) {
        h.x_edges[std::size_t(i)] = xlo + (xhi - xlo) * double(i) / double(bins);
        h.y_edges[std::size_t(i)] = ylo + (yhi - ylo) * double(i) / double(bins);
    }
    h.counts.assign(std::size_t(bins), std::vector<long>(std::size_t(bins), 0));
    auto bin_of = [bins](double v, double lo, double hi) {
        int b = int(double(bins) * (v - lo) / (hi - lo));
        return std::min(std::max(b, 0), bins - 1);  // top edge inclusive
    };
    for (const auto& p : pairs)
        h.counts[std::size_t(bin_of(p.observed, ylo, yhi))]
                [std::size_t(bin_of(p.commanded, xlo, xhi))] += 1;
    return h;
}

void write_heatmap(const std::string& path, const Heatmap& h) {
    std::ostringstream out;
    out << "pearson," << fmt(h.pearson) << "\n";
    out << "x_edges";
    for (double e : h.x_edges) out << "," << fmt(e);
    out << "\ny_edges";
    for (double e : h.y_edges) out << "," << fmt(e);
    out << "\n";
    // top row = highest y bin, so the diagonal reads bottom-left to top-right
    for (int y = int(h.counts.size()) - 1; y >= 0; --y) {
        const auto& row = h.counts[std::size_t(y)];
        for (std::size_t x = 0; x < row.size(); ++x) out << (x ? "," : "") << row[x];
        out << "\n";
    }
    atomic_write_text(path, out.str());
}

}  // namespace rcp
