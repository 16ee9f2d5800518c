#include "qrdyn/cli.hpp"

#include "qrdyn/errors.hpp"
#include "qrdyn/gridio.hpp"
#include "qrdyn/infspace.hpp"
#include "qrdyn/linearizer.hpp"
#include "qrdyn/linmap.hpp"
#include "qrdyn/powermap.hpp"
#include "qrdyn/zorich.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <ostream>
#include <sstream>

namespace qrdyn::cli {

namespace {

using gridio::GridSpec;
using gridio::ScanTable;
using nlohmann::ordered_json;

std::string point_csv(const PointN& p) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        out << gridio::format_double(p[i]) << (i + 1 < p.size() ? "," : "");
    return out.str();
}

void count_line_column(const std::string& text, std::size_t byte, int& line, int& column) {
    line = 1;
    column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
}

void validate_config(const RunConfig& cfg) {
    if (cfg.m < 2) throw domain_error("config: m must be >= 2");
    if (cfg.k < -1) throw domain_error("config: k must be non-negative");
    if (!(cfg.tol > 0.0)) throw domain_error("config: tol must be positive");
    if (cfg.samples < 1) throw domain_error("config: samples must be positive");
    if (cfg.rho_base < 0.0) throw domain_error("config: rho-base must be positive");
    if (cfg.format != "csv" && cfg.format != "json")
        throw domain_error("config: format must be csv or json");
}

RunConfig merge_config_json(const std::string& text, RunConfig cfg) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        int line = 0, column = 0;
        count_line_column(text, e.byte > 0 ? e.byte - 1 : 0, line, column);
        throw parse_error("config JSON error at line " + std::to_string(line) + ", column " +
                          std::to_string(column) + ": " + e.what());
    }
    if (!doc.is_object()) throw parse_error("config JSON must be an object");
    if (doc.contains("m")) cfg.m = doc["m"].get<int>();
    if (doc.contains("k")) cfg.k = doc["k"].get<int>();
    if (doc.contains("rho_base")) cfg.rho_base = doc["rho_base"].get<double>();
    if (doc.contains("tol")) cfg.tol = doc["tol"].get<double>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("samples")) cfg.samples = doc["samples"].get<std::int64_t>();
    if (doc.contains("out")) cfg.out = doc["out"].get<std::string>();
    if (doc.contains("format")) cfg.format = doc["format"].get<std::string>();
    return cfg;
}

// Emit a table to --out (atomic) or to the stream, in the chosen format.
void deliver_table(const ScanTable& table, const RunConfig& cfg, std::ostream& out) {
    const std::string text = (cfg.format == "json") ? table.to_json() : table.to_csv();
    if (cfg.out.empty())
        out << text;
    else
        gridio::write_text_atomic(cfg.out, text);
}

void deliver_text(const std::string& text, const RunConfig& cfg, std::ostream& out) {
    if (cfg.out.empty())
        out << text;
    else
        gridio::write_text_atomic(cfg.out, text);
}

std::vector<Point3> cube_grid3(const GridSpec& spec) {
    std::vector<Point3> grid;
    for (const PointN& p : gridio::cube_grid(spec, 3)) grid.emplace_back(Point3(p));
    return grid;
}

ordered_json certificate_json(const linmap::UqcCertificate& cert) {
    ordered_json doc;
    doc["eigen_moduli"] = cert.eigen_moduli;
    doc["moduli_spread"] = cert.moduli_spread;
    doc["diagonalizable"] = cert.diagonalizable;
    doc["eigenvector_condition"] = cert.eigenvector_condition;
    doc["growth_profile"] = cert.growth_profile;
    if (cert.profile_truncated_at)
        doc["profile_truncated_at"] = *cert.profile_truncated_at;
    else
        doc["profile_truncated_at"] = nullptr;
    doc["verdict"] = linmap::to_string(cert.verdict);
    return doc;
}

linearizer::LinearizerApprox power_family(int m, int k, double rho_base, double scale,
                                          double domain_radius) {
    powermap::PowerMapParams params{m};
    linearizer::LinearizerApprox spec;
    spec.map = powermap::make_power_map(params);
    spec.fixed_point = Point3(0.0, 0.0, 1.0);
    const double base = (rho_base > 0.0) ? rho_base : params.similarity_factor();
    if (scale == 1.0) {
        spec.rescale = linearizer::RescaleSequence::geometric(base);
    } else {
        std::vector<double> values;
        double rho = scale;
        for (int i = 0; i <= k; ++i) {
            values.push_back(rho);
            rho /= base;
        }
        spec.rescale = linearizer::RescaleSequence::explicit_list(values);
    }
    spec.depth = k;
    spec.domain_radius = domain_radius;
    return spec;
}

// ---- subcommand implementations ----

int run_zorich_eval(const RunConfig& cfg, const std::string& point, std::ostream& out) {
    const PointN p = gridio::parse_point(point);
    if (p.size() != 3) throw domain_error("zorich eval expects a 3-D point");
    deliver_text(point_csv(zorich::zorich_eval(Point3(p))) + "\n", cfg, out);
    return 0;
}

int run_zorich_invert(const RunConfig& cfg, const std::string& point,
                      const std::string& branch, std::ostream& out) {
    const PointN p = gridio::parse_point(point);
    if (p.size() != 3) throw domain_error("zorich invert expects a 3-D point");
    const PointN b = gridio::parse_point(branch);
    if (b.size() != 2) throw domain_error("branch must be i,j");
    zorich::BeamAddress addr{static_cast<long>(std::llround(b[0])),
                             static_cast<long>(std::llround(b[1]))};
    deliver_text(point_csv(zorich::zorich_invert(Point3(p), addr)) + "\n", cfg, out);
    return 0;
}

int run_zorich_invariance(const RunConfig& cfg, const std::string& grid_text,
                          std::ostream& out) {
    const GridSpec spec = gridio::parse_grid_spec(grid_text);
    const std::vector<Point3> samples = cube_grid3(spec);
    const std::vector<std::pair<std::string, zorich::IsometryElement>> generators = {
        {"translation_2pi_u", zorich::IsometryElement::translation(2.0 * kPi, 0.0)},
        {"translation_2pi_v", zorich::IsometryElement::translation(0.0, 2.0 * kPi)},
        {"point_rotation", zorich::IsometryElement::point_rotation(kPi / 2, kPi / 2)},
        {"translation_pi_u", zorich::IsometryElement::translation(kPi, 0.0)},
    };
    std::ostringstream text;
    text << "generator,residual\n";
    for (const auto& [name, gen] : generators)
        text << name << "," << gridio::format_double(zorich::invariance_residual(gen, samples))
             << "\n";
    deliver_text(text.str(), cfg, out);
    return 0;
}

int run_power_eval(const RunConfig& cfg, const std::string& point, std::ostream& out) {
    const PointN p = gridio::parse_point(point);
    if (p.size() != 3) throw domain_error("power eval expects a 3-D point");
    powermap::PowerMapParams params{cfg.m};
    deliver_text(point_csv(powermap::power_eval(Point3(p), params)) + "\n", cfg, out);
    return 0;
}

int run_power_residual(const RunConfig& cfg, const std::string& grid_text, std::ostream& out) {
    const GridSpec spec = gridio::parse_grid_spec(grid_text);
    powermap::PowerMapParams params{cfg.m};
    ScanTable table;
    table.columns = {"u", "v", "w", "residual"};
    for (const Point3& x : cube_grid3(spec))
        table.rows.push_back({x[0], x[1], x[2], powermap::schroder_residual(x, params)});
    deliver_table(table, cfg, out);
    return 0;
}

int run_power_orbit(const RunConfig& cfg, const std::string& point, std::ostream& out) {
    const PointN p = gridio::parse_point(point);
    if (p.size() != 3) throw domain_error("power orbit expects a 3-D point");
    powermap::PowerMapParams params{cfg.m};
    const powermap::OrbitResult orbit = powermap::orbit(Point3(p), params, cfg.depth_or(12));
    ordered_json doc;
    doc["m"] = cfg.m;
    doc["k"] = cfg.depth_or(12);
    doc["points"] = ordered_json::array();
    for (const Point3& q : orbit.points) doc["points"].push_back({q[0], q[1], q[2]});
    if (orbit.truncated_at)
        doc["truncated_at"] = *orbit.truncated_at;
    else
        doc["truncated_at"] = nullptr;
    deliver_text(doc.dump(2) + "\n", cfg, out);
    return 0;
}

int run_power_branches(const RunConfig& cfg, const std::string& point,
                       const std::vector<std::string>& addresses, std::ostream& out) {
    const PointN p = gridio::parse_point(point);
    if (p.size() != 3) throw domain_error("power branches expects a 3-D point");
    if (addresses.empty()) throw domain_error("power branches needs at least one --addr");
    std::vector<zorich::BeamAddress> addrs;
    for (const std::string& a : addresses) {
        const PointN b = gridio::parse_point(a);
        if (b.size() != 2) throw parse_error("--addr must be i,j");
        addrs.push_back({static_cast<long>(std::llround(b[0])),
                         static_cast<long>(std::llround(b[1]))});
    }
    powermap::PowerMapParams params{cfg.m};
    const double d = powermap::branch_consistency(Point3(p), params, addrs);
    deliver_text(gridio::format_double(d) + "\n", cfg, out);
    return 0;
}

int run_linearize_koenigs(const RunConfig& cfg, const std::string& poly_path,
                          const std::string& point, std::ostream& out) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(gridio::read_text(poly_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(std::string("polynomial JSON: ") + e.what());
    }
    if (!doc.contains("coeffs") || !doc.contains("z0"))
        throw parse_error("polynomial JSON needs 'coeffs' and 'z0'");
    std::vector<Eigen::Vector2d> coeffs;
    for (const auto& c : doc["coeffs"])
        coeffs.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
    const Eigen::Vector2d z0(doc["z0"].at(0).get<double>(), doc["z0"].at(1).get<double>());
    const PointN zp = gridio::parse_point(point);
    if (zp.size() != 2) throw domain_error("koenigs expects a planar point re,im");
    const Eigen::Vector2d value =
        linearizer::koenigs_polynomial(coeffs, z0, cfg.depth_or(30), {zp[0], zp[1]});
    deliver_text(point_csv(value) + "\n", cfg, out);
    return 0;
}

int run_linearize_approx(const RunConfig& cfg, const std::string& point, std::ostream& out) {
    const PointN p = gridio::parse_point(point);
    if (p.size() != 3) throw domain_error("linearize approx expects a 3-D point");
    auto spec = power_family(cfg.m, cfg.depth_or(12), cfg.rho_base, 1.0, std::max(2.0, p.norm() * 1.5));
    deliver_text(point_csv(linearizer::linearizer_approx(spec, p)) + "\n", cfg, out);
    return 0;
}

int run_linearize_relate(const RunConfig& cfg, double scale2, int depth, std::ostream& out) {
    const int family_depth = cfg.depth_or(12);
    const auto L = power_family(cfg.m, family_depth, cfg.rho_base, 1.0, 4.0);
    const auto M = power_family(cfg.m, family_depth, cfg.rho_base, scale2, 4.0);
    const double psi = static_cast<double>(powermap::PowerMapParams{cfg.m}.similarity_factor());
    const auto est = linearizer::conjugacy_estimate(L, M, linearizer::Similarity::scaling(psi),
                                                    linearizer::Similarity::scaling(psi), depth);
    ordered_json doc;
    doc["scalar_fit"] = est.scalar_fit;
    doc["scalar_residual"] = est.scalar_residual;
    doc["linear_fit"] = ordered_json::array();
    for (Eigen::Index i = 0; i < est.linear_fit.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < est.linear_fit.cols(); ++j) row.push_back(est.linear_fit(i, j));
        doc["linear_fit"].push_back(row);
    }
    doc["linear_residual"] = est.linear_residual;
    doc["dilatation_by_depth"] = est.dilatation_by_depth;
    doc["samples"] = est.samples.size();
    doc["dropped"] = est.dropped;
    doc["attempted"] = est.attempted;
    deliver_text(doc.dump(2) + "\n", cfg, out);
    return 0;
}

int run_linearize_transfer(const RunConfig& cfg, const std::string& grid_text,
                           std::ostream& out) {
    const GridSpec spec = gridio::parse_grid_spec(grid_text);
    const auto L_spec = power_family(cfg.m, cfg.depth_or(12), cfg.rho_base, 1.0, 8.0);
    const MapHandle L = linearizer::make_map(L_spec);
    const MapHandle G = linearizer::conjugacy_map(L, zorich::make_zorich_map());

    const std::vector<zorich::IsometryElement> gens = {
        zorich::IsometryElement::translation(2.0 * kPi, 0.0),
        zorich::IsometryElement::translation(0.0, 2.0 * kPi),
        zorich::IsometryElement::point_rotation(kPi / 2, kPi / 2),
    };
    const auto result =
        linearizer::automorphy_transfer_check(L, G, gens, gridio::cube_grid(spec, 3));
    ordered_json doc;
    doc["residual"] = result.residual;
    doc["dropped"] = result.dropped;
    doc["attempted"] = result.attempted;
    deliver_text(doc.dump(2) + "\n", cfg, out);
    return 0;
}

int run_uqc_check(const RunConfig& cfg, const std::string& matrix_path, std::ostream& out) {
    const Mat a = gridio::read_matrix_file(matrix_path);
    const auto cert = linmap::uqc_verdict(a, cfg.tol);
    deliver_text(certificate_json(cert).dump(2) + "\n", cfg, out);
    return 0;
}

int run_uqc_profile(const RunConfig& cfg, const std::string& matrix_path, int m_max,
                    std::ostream& out) {
    const Mat a = gridio::read_matrix_file(matrix_path);
    const auto profile = linmap::power_dilatation_profile(a, m_max);
    ScanTable table;
    table.columns = {"m", "outer", "inner", "max_dilatation"};
    int m = 1;
    for (const auto& r : profile.reports)
        table.rows.push_back({static_cast<double>(m++), r.outer, r.inner, r.max_dilatation});
    deliver_table(table, cfg, out);
    return 0;
}

int run_infspace_stretch(const RunConfig& cfg, const std::string& point, std::ostream& out) {
    const PointN p = gridio::parse_point(point);
    if (p.size() != 2) throw domain_error("stretch expects a planar point");
    const Eigen::Vector2d s = infspace::radial_stretch({p[0], p[1]});
    deliver_text(point_csv(s) + "\n", cfg, out);
    return 0;
}

int run_infspace_model(const RunConfig& cfg, const std::string& point, std::ostream& out) {
    if (point.empty()) {
        deliver_text(gridio::format_double(infspace::model_constant()) + "\n", cfg, out);
        return 0;
    }
    const PointN p = gridio::parse_point(point);
    if (p.size() != 3) throw domain_error("model expects a 3-D point");
    deliver_text(point_csv(infspace::homogeneous_model(Point3(p))) + "\n", cfg, out);
    return 0;
}

int run_infspace_meanradius(const RunConfig& cfg, const std::string& map_name, double rho,
                            const std::string& center, std::ostream& out) {
    MapHandle f;
    PointN x0;
    if (map_name == "identity") {
        f = make_linear_map(Mat::Identity(3, 3), "identity");
        x0 = Point3::Zero();
    } else if (map_name == "zorich-inverse") {
        f = zorich::make_zorich_inverse_map();
        x0 = Point3(0.0, 0.0, 1.0);
    } else if (map_name == "model") {
        f = infspace::make_model_map();
        x0 = Point3::Zero();
    } else {
        throw domain_error("meanradius map must be identity, zorich-inverse, or model");
    }
    if (!center.empty()) {
        x0 = gridio::parse_point(center);
        if (x0.size() != 3) throw domain_error("center must be a 3-D point");
    }
    const auto est = infspace::mean_radius(f, x0, rho, cfg.samples, cfg.seed);
    ordered_json doc;
    doc["value"] = est.value;
    doc["rho"] = est.rho;
    doc["samples_used"] = est.samples_used;
    doc["dropped"] = est.dropped;
    doc["standard_error"] = est.standard_error;
    deliver_text(doc.dump(2) + "\n", cfg, out);
    return 0;
}

int run_infspace_l1check(const RunConfig& cfg, double r, const std::string& grid_text,
                         std::ostream& out) {
    const GridSpec spec = gridio::parse_grid_spec(grid_text);
    const double residual =
        infspace::l1_family_check(r, powermap::PowerMapParams{cfg.m}, cube_grid3(spec));
    deliver_text(gridio::format_double(residual) + "\n", cfg, out);
    return 0;
}

int run_scan_dilatation(const RunConfig& cfg, const std::string& map_name,
                        const std::string& grid_text, const std::string& offset_text,
                        std::ostream& out) {
    const GridSpec spec = gridio::parse_grid_spec(grid_text);
    Point3 offset = Point3::Zero();
    if (!offset_text.empty()) {
        const PointN o = gridio::parse_point(offset_text);
        if (o.size() != 3) throw domain_error("offset must be a 3-D point");
        offset = Point3(o);
    }
    MapHandle f;
    if (map_name == "zorich")
        f = zorich::make_zorich_map();
    else if (map_name == "power")
        f = powermap::make_power_map(powermap::PowerMapParams{cfg.m});
    else if (map_name == "model")
        f = infspace::make_model_map();
    else
        throw domain_error("scan map must be zorich, power, or model");

    ScanTable table;
    table.columns = {"u", "v", "w", "max_dilatation"};
    for (const Point3& base : cube_grid3(spec)) {
        const Point3 x = base + offset;
        const Mat jac = fd_jacobian(f.eval, x);
        table.rows.push_back(
            {x[0], x[1], x[2], linmap::singular_dilatation(jac).max_dilatation});
    }
    deliver_table(table, cfg, out);
    return 0;
}

}  // namespace

RunConfig load_config(const std::string& path) {
    const RunConfig merged = merge_config_json(gridio::read_text(path), RunConfig{});
    validate_config(merged);
    return merged;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"numerical toolkit for quasiregular dynamics", "qrdyn"};
    app.require_subcommand(1);

    // defaults <- config file <- flags
    RunConfig cfg;
    try {
        for (std::size_t i = 0; i + 1 < args.size(); ++i) {
            if (args[i] == "--config") {
                cfg = merge_config_json(gridio::read_text(args[i + 1]), cfg);
                break;
            }
        }
    } catch (const parse_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override)");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--m", cfg.m, "power map parameter m (similarity m^2)");
        sub->add_option("--k", cfg.k, "iteration depth");
        sub->add_option("--rho-base", cfg.rho_base, "geometric rescale base");
        sub->add_option("--tol", cfg.tol, "tolerance");
        sub->add_option("--seed", cfg.seed, "Monte Carlo seed");
        sub->add_option("--samples", cfg.samples, "Monte Carlo sample count");
        sub->add_option("--out", cfg.out, "output file (atomic write)");
        sub->add_option("--format", cfg.format, "output format: csv or json");
    };

    std::string point, branch = "0,0", grid = "-1,1,5", matrix_path, poly_path;
    std::string map_name = "zorich", center, offset;
    std::vector<std::string> addresses;
    double rho = 1e-3, radius = 1.0, scale2 = 2.0;
    int m_max = 40, depth = 3;

    CLI::App* zorich_cmd = app.add_subcommand("zorich", "Zorich map operations");
    CLI::App* z_eval = zorich_cmd->add_subcommand("eval", "evaluate Z(u,v,w)");
    z_eval->add_option("--point", point, "domain point u,v,w")->required();
    add_common(z_eval);
    CLI::App* z_invert = zorich_cmd->add_subcommand("invert", "branch inverse of Z");
    z_invert->add_option("--point", point, "image point a,b,c")->required();
    z_invert->add_option("--branch", branch, "beam address i,j");
    add_common(z_invert);
    CLI::App* z_invariance =
        zorich_cmd->add_subcommand("invariance", "residuals of the deck generators");
    z_invariance->add_option("--grid", grid, "sample grid lo,hi,n");
    add_common(z_invariance);

    CLI::App* power_cmd = app.add_subcommand("power", "Lattes-type power map");
    CLI::App* p_eval = power_cmd->add_subcommand("eval", "evaluate P(y)");
    p_eval->add_option("--point", point, "point a,b,c")->required();
    add_common(p_eval);
    CLI::App* p_residual = power_cmd->add_subcommand("residual", "Schroder residual scan");
    p_residual->add_option("--grid", grid, "grid lo,hi,n");
    add_common(p_residual);
    CLI::App* p_orbit = power_cmd->add_subcommand("orbit", "orbit y, P(y), ..., P^k(y)");
    p_orbit->add_option("--point", point, "start point a,b,c")->required();
    add_common(p_orbit);
    CLI::App* p_branches = power_cmd->add_subcommand("branches", "branch consistency");
    p_branches->add_option("--point", point, "point a,b,c")->required();
    p_branches->add_option("--addr", addresses, "beam address i,j (repeatable)");
    add_common(p_branches);

    CLI::App* lin_cmd = app.add_subcommand("linearize", "Poincare/Koenigs linearizers");
    CLI::App* l_koenigs = lin_cmd->add_subcommand("koenigs", "planar Koenigs approximant");
    l_koenigs->add_option("--poly", poly_path, "polynomial JSON {coeffs, z0}")->required();
    l_koenigs->add_option("--point", point, "planar point re,im")->required();
    add_common(l_koenigs);
    CLI::App* l_approx = lin_cmd->add_subcommand("approx", "L_k for the power map");
    l_approx->add_option("--point", point, "point x,y,z")->required();
    add_common(l_approx);
    CLI::App* l_relate = lin_cmd->add_subcommand("relate", "conjugacy between two families");
    l_relate->add_option("--scale2", scale2, "second family rho scale");
    l_relate->add_option("--depth", depth, "extension depth");
    add_common(l_relate);
    CLI::App* l_transfer = lin_cmd->add_subcommand("transfer", "automorphy transfer residual");
    l_transfer->add_option("--grid", grid, "grid lo,hi,n");
    add_common(l_transfer);

    CLI::App* uqc_cmd = app.add_subcommand("uqc", "uniform quasiconformality of linear maps");
    CLI::App* u_check = uqc_cmd->add_subcommand("check", "verdict certificate");
    u_check->add_option("--matrix", matrix_path, "matrix file (JSON rows or text)")->required();
    add_common(u_check);
    CLI::App* u_profile = uqc_cmd->add_subcommand("profile", "K(A^m) profile");
    u_profile->add_option("--matrix", matrix_path, "matrix file")->required();
    u_profile->add_option("--m-max", m_max, "profile length");
    add_common(u_profile);

    CLI::App* inf_cmd = app.add_subcommand("infspace", "infinitesimal space tools");
    CLI::App* i_stretch = inf_cmd->add_subcommand("stretch", "radial stretch s(u,v)");
    i_stretch->add_option("--point", point, "planar point u,v")->required();
    add_common(i_stretch);
    CLI::App* i_model = inf_cmd->add_subcommand("model", "homogeneous model g / constant C");
    i_model->add_option("--point", point, "3-D point (omit to print C)");
    add_common(i_model);
    CLI::App* i_mean = inf_cmd->add_subcommand("meanradius", "Monte Carlo mean radius");
    i_mean->add_option("--map", map_name, "identity | zorich-inverse | model");
    i_mean->add_option("--rho", rho, "ball radius");
    i_mean->add_option("--center", center, "ball center x,y,z");
    add_common(i_mean);
    CLI::App* i_l1 = inf_cmd->add_subcommand("l1check", "L1 family residual");
    i_l1->add_option("--r", radius, "family parameter r > 0");
    i_l1->add_option("--grid", grid, "grid lo,hi,n");
    add_common(i_l1);

    CLI::App* scan_cmd = app.add_subcommand("scan", "grid scans");
    CLI::App* s_dil = scan_cmd->add_subcommand("dilatation", "pointwise dilatation scan");
    s_dil->add_option("--map", map_name, "zorich | power | model");
    s_dil->add_option("--grid", grid, "grid lo,hi,n");
    s_dil->add_option("--offset", offset, "grid offset u,v,w");
    add_common(s_dil);

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            const CLI::App* deepest = &app;
            while (!deepest->get_subcommands().empty())
                deepest = deepest->get_subcommands().front();
            out << deepest->help();
            return 0;
        }
        err << "error: " << e.what() << "\n" << app.help() << "\n";
        return 2;
    }

    try {
        validate_config(cfg);
        if (z_eval->parsed()) return run_zorich_eval(cfg, point, out);
        if (z_invert->parsed()) return run_zorich_invert(cfg, point, branch, out);
        if (z_invariance->parsed()) return run_zorich_invariance(cfg, grid, out);
        if (p_eval->parsed()) return run_power_eval(cfg, point, out);
        if (p_residual->parsed()) return run_power_residual(cfg, grid, out);
        if (p_orbit->parsed()) return run_power_orbit(cfg, point, out);
        if (p_branches->parsed()) return run_power_branches(cfg, point, addresses, out);
        if (l_koenigs->parsed()) return run_linearize_koenigs(cfg, poly_path, point, out);
        if (l_approx->parsed()) return run_linearize_approx(cfg, point, out);
        if (l_relate->parsed()) return run_linearize_relate(cfg, scale2, depth, out);
        if (l_transfer->parsed()) return run_linearize_transfer(cfg, grid, out);
        if (u_check->parsed()) return run_uqc_check(cfg, matrix_path, out);
        if (u_profile->parsed()) return run_uqc_profile(cfg, matrix_path, m_max, out);
        if (i_stretch->parsed()) return run_infspace_stretch(cfg, point, out);
        if (i_model->parsed()) return run_infspace_model(cfg, point, out);
        if (i_mean->parsed()) return run_infspace_meanradius(cfg, map_name, rho, center, out);
        if (i_l1->parsed()) return run_infspace_l1check(cfg, radius, grid, out);
        if (s_dil->parsed()) return run_scan_dilatation(cfg, map_name, grid, offset, out);
        err << "error: no subcommand selected\n" << app.help() << "\n";
        return 2;
    } catch (const parse_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace qrdyn::cli
