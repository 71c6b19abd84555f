#include "core/config.hpp"

#include "core/errors.hpp"
#include "core/text.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace biodiff {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void fail(const std::string& message) { throw config_error(message); }

double to_double(const std::string& text, const std::string& path)
{
    try {
        return parse_double(text, path);
    } catch (const std::invalid_argument&) {
        fail("element " + path + " holds '" + text + "', expected a number");
    }
}

std::int64_t to_int(const std::string& text, const std::string& path)
{
    try {
        return parse_int(text, path);
    } catch (const std::invalid_argument&) {
        fail("element " + path + " holds '" + text + "', expected an integer");
    }
}

std::vector<double> to_double_list(const std::string& text, const std::string& path)
{
    std::vector<double> values;
    for (const auto& tok : split_csv_line(text)) values.push_back(to_double(tok, path));
    return values;
}

/// Strict view over one element: children must be consumed by name, anything
/// left over (or any attribute) is an error carrying the element path.
class Scope {
public:
    Scope(const pt::ptree& node, std::string path) : node_(node), path_(std::move(path))
    {
        for (const auto& [key, child] : node_) {
            if (key == "<xmlattr>")
                fail("element " + path_ + " carries attributes; this schema uses none");
            if (key == "<xmltext>") continue;
            ++seen_[key];
        }
    }

    const std::string& path() const { return path_; }

    bool has(const std::string& key) const { return seen_.count(key) > 0; }

    const pt::ptree& child(const std::string& key)
    {
        require_unique(key);
        consumed_.insert(key);
        return node_.get_child(key);
    }

    std::optional<std::string> text(const std::string& key)
    {
        if (!has(key)) return std::nullopt;
        require_unique(key);
        consumed_.insert(key);
        return trim(node_.get_child(key).get_value<std::string>());
    }

    std::optional<double> number(const std::string& key)
    {
        auto t = text(key);
        if (!t) return std::nullopt;
        return to_double(*t, path_ + "." + key);
    }

    std::optional<std::int64_t> integer(const std::string& key)
    {
        auto t = text(key);
        if (!t) return std::nullopt;
        return to_int(*t, path_ + "." + key);
    }

    /// All children named `key`, consuming them (repeats allowed).
    std::vector<const pt::ptree*> repeated(const std::string& key)
    {
        std::vector<const pt::ptree*> out;
        for (const auto& [name, child] : node_)
            if (name == key) out.push_back(&child);
        consumed_.insert(key);
        return out;
    }

    void finish() const
    {
        for (const auto& [key, count] : seen_)
            if (!consumed_.count(key)) fail("unknown element " + path_ + "." + key);
    }

private:
    void require_unique(const std::string& key) const
    {
        auto it = seen_.find(key);
        if (it != seen_.end() && it->second > 1)
            fail("element " + path_ + "." + key + " appears more than once");
    }

    const pt::ptree& node_;
    std::string path_;
    std::map<std::string, int> seen_;
    std::set<std::string> consumed_;
};

SimConfig parse_tree(const pt::ptree& root)
{
    const pt::ptree* sim = nullptr;
    int top_level = 0;
    for (const auto& [key, child] : root) {
        ++top_level;
        if (key == "simulation") sim = &child;
    }
    if (sim == nullptr || top_level != 1) fail("expected a single <simulation> root element");

    SimConfig cfg;
    Scope top(*sim, "simulation");

    if (top.has("domain")) {
        Scope d(top.child("domain"), "simulation.domain");
        if (auto v = d.number("x_min")) cfg.x_min = *v;
        if (auto v = d.number("x_max")) cfg.x_max = *v;
        if (auto v = d.number("y_min")) cfg.y_min = *v;
        if (auto v = d.number("y_max")) cfg.y_max = *v;
        if (auto v = d.number("z_min")) cfg.z_min = *v;
        if (auto v = d.number("z_max")) cfg.z_max = *v;
        if (auto v = d.number("dx")) cfg.dx = *v;
        if (auto v = d.number("dy")) cfg.dy = *v;
        if (auto v = d.number("dz")) cfg.dz = *v;
        d.finish();
    }

    if (top.has("overall")) {
        Scope o(top.child("overall"), "simulation.overall");
        if (auto v = o.number("max_time")) cfg.max_time = *v;
        if (auto v = o.number("dt_diff")) cfg.dt_diff = *v;
        if (auto v = o.number("dt_mech")) cfg.dt_mech = *v;
        if (auto v = o.number("dt_cell")) cfg.dt_cell = *v;
        o.finish();
    }

    if (top.has("parallel")) {
        Scope p(top.child("parallel"), "simulation.parallel");
        if (auto v = p.text("backend")) {
            if (*v == "serial")
                cfg.parallel_backend = false;
            else if (*v == "parallel")
                cfg.parallel_backend = true;
            else
                fail("element simulation.parallel.backend holds '" + *v +
                     "', expected 'serial' or 'parallel'");
        }
        if (auto v = p.integer("num_threads")) cfg.num_threads = static_cast<int>(*v);
        p.finish();
    }

    if (top.has("microenvironment")) {
        Scope m(top.child("microenvironment"), "simulation.microenvironment");
        for (const pt::ptree* sub : m.repeated("substrate")) {
            Scope s(*sub, "simulation.microenvironment.substrate");
            SubstrateConfig sc;
            if (auto v = s.text("name")) sc.name = *v;
            if (sc.name.empty())
                fail("element simulation.microenvironment.substrate needs a non-empty <name>");
            if (auto v = s.number("diffusion_coefficient")) sc.diffusion_coefficient = *v;
            if (auto v = s.number("decay_rate")) sc.decay_rate = *v;
            if (auto v = s.number("initial_condition")) sc.initial_condition = *v;
            if (auto v = s.number("dirichlet_boundary_value")) sc.dirichlet_boundary_value = *v;
            s.finish();
            cfg.substrates.push_back(std::move(sc));
        }
        m.finish();
    }

    if (top.has("agents")) {
        Scope a(top.child("agents"), "simulation.agents");
        if (auto v = a.text("file")) cfg.agent_file = *v;
        const bool inline_keys = a.has("count") || a.has("placement") || a.has("seed") ||
                                 a.has("volume") || a.has("secretion_rates") ||
                                 a.has("uptake_rates") || a.has("saturation_densities");
        if (cfg.agent_file && inline_keys)
            fail("element simulation.agents must give either <file> or an inline "
                 "<count>/<placement> block, not both");
        if (inline_keys) {
            InlineAgentsConfig ia;
            if (auto v = a.integer("count")) ia.count = *v;
            if (auto v = a.text("placement")) ia.placement = *v;
            if (auto v = a.integer("seed")) ia.seed = static_cast<std::uint64_t>(*v);
            if (auto v = a.number("volume")) ia.volume = *v;
            if (auto v = a.text("secretion_rates"))
                ia.secretion_rates = to_double_list(*v, "simulation.agents.secretion_rates");
            if (auto v = a.text("uptake_rates"))
                ia.uptake_rates = to_double_list(*v, "simulation.agents.uptake_rates");
            if (auto v = a.text("saturation_densities"))
                ia.saturation_densities =
                    to_double_list(*v, "simulation.agents.saturation_densities");
            cfg.inline_agents = std::move(ia);
        }
        a.finish();
    }

    if (top.has("save")) {
        Scope s(top.child("save"), "simulation.save");
        if (auto v = s.number("snapshot_interval")) cfg.snapshot_interval = *v;
        if (auto v = s.text("folder")) cfg.output_folder = *v;
        s.finish();
    }

    top.finish();
    cfg.validate();
    return cfg;
}

/// dt ratios must be positive integers (within rounding slop on the division).
std::int64_t integral_ratio(double coarse, double fine, const std::string& what)
{
    const double ratio = coarse / fine;
    const auto rounded = static_cast<std::int64_t>(std::llround(ratio));
    if (rounded < 1 || std::abs(ratio - static_cast<double>(rounded)) > 1e-9 * ratio)
        fail(what + " = " + format_double(ratio) + " must be a positive integer");
    return rounded;
}

} // namespace

void SimConfig::validate() const
{
    mesh(); // throws config_error on bad bounds/spacings

    if (!(dt_diff > 0.0) || !(dt_mech > 0.0) || !(dt_cell > 0.0))
        fail("step sizes dt_diff/dt_mech/dt_cell must be positive");
    if (dt_diff > dt_mech || dt_mech > dt_cell)
        fail("step sizes must satisfy dt_diff <= dt_mech <= dt_cell");
    integral_ratio(dt_mech, dt_diff, "dt_mech/dt_diff");
    integral_ratio(dt_cell, dt_mech, "dt_cell/dt_mech");
    if (max_time < 0.0) fail("max_time must be non-negative");
    if (num_threads < 1) fail("num_threads must be at least 1");

    if (substrates.empty()) fail("at least one substrate must be declared");
    std::set<std::string> names;
    for (const auto& s : substrates) {
        if (s.name.empty()) fail("substrate names must be non-empty");
        if (!names.insert(s.name).second) fail("duplicate substrate name '" + s.name + "'");
        if (s.diffusion_coefficient < 0.0)
            fail("substrate '" + s.name + "' diffusion_coefficient must be >= 0");
        if (s.decay_rate < 0.0) fail("substrate '" + s.name + "' decay_rate must be >= 0");
    }

    if (agent_file && inline_agents) fail("agents: give either a file or an inline block");
    if (inline_agents) {
        const auto& ia = *inline_agents;
        if (ia.count < 0) fail("agents.count must be >= 0");
        if (!(ia.volume > 0.0)) fail("agents.volume must be positive");
        if (ia.placement != "random" && ia.placement != "center")
            fail("agents.placement must be 'random' or 'center', got '" + ia.placement + "'");
        auto check_list = [&](const std::vector<double>& v, const char* what) {
            if (!v.empty() && v.size() != substrates.size())
                fail(std::string("agents.") + what + " must list one value per substrate");
            for (double x : v)
                if (x < 0.0) fail(std::string("agents.") + what + " entries must be >= 0");
        };
        check_list(ia.secretion_rates, "secretion_rates");
        check_list(ia.uptake_rates, "uptake_rates");
        check_list(ia.saturation_densities, "saturation_densities");
    }
}

CartesianMesh SimConfig::mesh() const
{
    return CartesianMesh::from_bounds(x_min, x_max, y_min, y_max, z_min, z_max, dx, dy, dz);
}

SimConfig parse_config(const std::string& path)
{
    if (!std::filesystem::exists(path)) fail("config file not found: " + path);

    pt::ptree tree;
    try {
        pt::read_xml(path, tree,
                     pt::xml_parser::trim_whitespace | pt::xml_parser::no_comments);
    } catch (const pt::xml_parser_error& e) {
        fail("malformed XML in " + path + " line " + format_int(e.line()) + ": " + e.message());
    }
    SimConfig cfg = parse_tree(tree);

    if (cfg.agent_file && !std::filesystem::exists(*cfg.agent_file))
        fail("agent file not found: " + *cfg.agent_file);
    return cfg;
}

SimConfig parse_config_text(const std::string& xml_text)
{
    pt::ptree tree;
    std::istringstream in(xml_text);
    try {
        pt::read_xml(in, tree, pt::xml_parser::trim_whitespace | pt::xml_parser::no_comments);
    } catch (const pt::xml_parser_error& e) {
        fail("malformed XML line " + format_int(e.line()) + ": " + e.message());
    }
    return parse_tree(tree);
}

std::string serialize_config(const SimConfig& c)
{
    std::ostringstream out;
    auto elem = [&](int indent, const std::string& key, const std::string& value) {
        out << std::string(static_cast<std::size_t>(indent), ' ') << '<' << key << '>' << value
            << "</" << key << ">\n";
    };

    out << "<simulation>\n";
    out << "  <domain>\n";
    elem(4, "x_min", format_double(c.x_min));
    elem(4, "x_max", format_double(c.x_max));
    elem(4, "y_min", format_double(c.y_min));
    elem(4, "y_max", format_double(c.y_max));
    elem(4, "z_min", format_double(c.z_min));
    elem(4, "z_max", format_double(c.z_max));
    elem(4, "dx", format_double(c.dx));
    elem(4, "dy", format_double(c.dy));
    elem(4, "dz", format_double(c.dz));
    out << "  </domain>\n";
    out << "  <overall>\n";
    elem(4, "max_time", format_double(c.max_time));
    elem(4, "dt_diff", format_double(c.dt_diff));
    elem(4, "dt_mech", format_double(c.dt_mech));
    elem(4, "dt_cell", format_double(c.dt_cell));
    out << "  </overall>\n";
    out << "  <parallel>\n";
    elem(4, "backend", c.parallel_backend ? "parallel" : "serial");
    elem(4, "num_threads", format_int(c.num_threads));
    out << "  </parallel>\n";
    out << "  <microenvironment>\n";
    for (const auto& s : c.substrates) {
        out << "    <substrate>\n";
        elem(6, "name", s.name);
        elem(6, "diffusion_coefficient", format_double(s.diffusion_coefficient));
        elem(6, "decay_rate", format_double(s.decay_rate));
        elem(6, "initial_condition", format_double(s.initial_condition));
        if (s.dirichlet_boundary_value)
            elem(6, "dirichlet_boundary_value", format_double(*s.dirichlet_boundary_value));
        out << "    </substrate>\n";
    }
    out << "  </microenvironment>\n";
    if (c.agent_file || c.inline_agents) {
        out << "  <agents>\n";
        if (c.agent_file) elem(4, "file", *c.agent_file);
        if (c.inline_agents) {
            const auto& ia = *c.inline_agents;
            elem(4, "count", format_int(ia.count));
            elem(4, "placement", ia.placement);
            elem(4, "seed", format_int(static_cast<std::int64_t>(ia.seed)));
            elem(4, "volume", format_double(ia.volume));
            auto list = [&](const char* key, const std::vector<double>& v) {
                if (v.empty()) return;
                std::string joined;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) joined += ',';
                    joined += format_double(v[i]);
                }
                elem(4, key, joined);
            };
            list("secretion_rates", ia.secretion_rates);
            list("uptake_rates", ia.uptake_rates);
            list("saturation_densities", ia.saturation_densities);
        }
        out << "  </agents>\n";
    }
    out << "  <save>\n";
    elem(4, "snapshot_interval", format_double(c.snapshot_interval));
    elem(4, "folder", c.output_folder);
    out << "  </save>\n";
    out << "</simulation>\n";
    return out.str();
}

void save_config(const SimConfig& config, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << serialize_config(config);
    if (!out) throw io_error("failed writing " + path);
}

namespace {

[[noreturn]] void agent_fail(const std::string& path, std::size_t line, const std::string& msg)
{
    fail("agent file " + path + " line " + format_int(static_cast<std::int64_t>(line)) + ": " +
         msg);
}

} // namespace

AgentPopulation load_agents(const std::string& path, const CartesianMesh& mesh,
                            const std::vector<SubstrateConfig>& substrates)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("agent file not found: " + path);

    std::string expected_header = "id,x,y,z,volume";
    for (const auto& s : substrates)
        expected_header += ",S_" + s.name + ",U_" + s.name + ",target_" + s.name;

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) fail("agent file " + path + " is empty");
    ++line_no;
    if (trim(line) != expected_header)
        agent_fail(path, line_no, "header must be '" + expected_header + "'");

    const std::size_t S = substrates.size();
    std::vector<CellAgent> agents;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto fields = split_csv_line(stripped);
        if (fields.size() != 5 + 3 * S)
            agent_fail(path, line_no,
                       "expected " + format_int(static_cast<std::int64_t>(5 + 3 * S)) +
                           " fields, got " + format_int(static_cast<std::int64_t>(fields.size())));
        try {
            CellAgent a;
            a.id = parse_int(fields[0], "id");
            a.position = {parse_double(fields[1], "x"), parse_double(fields[2], "y"),
                          parse_double(fields[3], "z")};
            a.volume = parse_double(fields[4], "volume");
            a.secretion_rates.resize(S);
            a.uptake_rates.resize(S);
            a.saturation_densities.resize(S);
            for (std::size_t s = 0; s < S; ++s) {
                a.secretion_rates[s] = parse_double(fields[5 + 3 * s], "secretion rate");
                a.uptake_rates[s] = parse_double(fields[6 + 3 * s], "uptake rate");
                a.saturation_densities[s] = parse_double(fields[7 + 3 * s], "target density");
            }
            agents.push_back(std::move(a));
        } catch (const std::invalid_argument& e) {
            agent_fail(path, line_no, e.what());
        }
    }

    try {
        return AgentPopulation(std::move(agents), mesh, static_cast<int>(S));
    } catch (const std::exception& e) {
        fail("agent file " + path + ": " + e.what());
    }
}

void save_agents(const AgentPopulation& agents,
                 const std::vector<SubstrateConfig>& substrates, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path + " for writing");

    out << "id,x,y,z,volume";
    for (const auto& s : substrates) out << ",S_" << s.name << ",U_" << s.name << ",target_" << s.name;
    out << "\n";
    for (const auto& a : agents.agents()) {
        out << format_int(a.id) << ',' << format_double(a.position[0]) << ','
            << format_double(a.position[1]) << ',' << format_double(a.position[2]) << ','
            << format_double(a.volume);
        for (std::size_t s = 0; s < substrates.size(); ++s)
            out << ',' << format_double(a.secretion_rates[s]) << ','
                << format_double(a.uptake_rates[s]) << ','
                << format_double(a.saturation_densities[s]);
        out << "\n";
    }
    if (!out) throw io_error("failed writing " + path);
}

Microenvironment build_microenvironment(const SimConfig& config)
{
    config.validate();
    const CartesianMesh mesh = config.mesh();

    std::vector<SubstrateParams> params;
    params.reserve(config.substrates.size());
    for (const auto& s : config.substrates)
        params.push_back({s.name, s.diffusion_coefficient, s.decay_rate, s.initial_condition});

    Microenvironment env = Microenvironment::create(mesh, std::move(params));

    const int S = config.substrate_count();
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(S), 0);
    std::vector<double> values(static_cast<std::size_t>(S), 0.0);
    bool any = false;
    for (int s = 0; s < S; ++s) {
        if (config.substrates[static_cast<std::size_t>(s)].dirichlet_boundary_value) {
            mask[static_cast<std::size_t>(s)] = 1;
            values[static_cast<std::size_t>(s)] =
                *config.substrates[static_cast<std::size_t>(s)].dirichlet_boundary_value;
            any = true;
        }
    }
    if (any) {
        for (int k = 0; k < mesh.nz; ++k)
            for (int j = 0; j < mesh.ny; ++j)
                for (int i = 0; i < mesh.nx; ++i)
                    if (mesh.is_boundary_voxel(i, j, k))
                        env.dirichlet.add(mesh.voxel_index(i, j, k), mask, values,
                                          mesh.voxel_count(), S);
    }
    return env;
}

AgentPopulation build_agents(const SimConfig& config, const CartesianMesh& mesh)
{
    const int S = config.substrate_count();
    if (config.agent_file) return load_agents(*config.agent_file, mesh, config.substrates);
    if (!config.inline_agents) return {};

    const auto& ia = *config.inline_agents;
    auto expand = [&](const std::vector<double>& v) {
        return v.empty() ? std::vector<double>(static_cast<std::size_t>(S), 0.0) : v;
    };
    const auto secretion = expand(ia.secretion_rates);
    const auto uptake = expand(ia.uptake_rates);
    const auto targets = expand(ia.saturation_densities);

    std::mt19937_64 rng(ia.seed);
    std::uniform_real_distribution<double> ux(mesh.x_min, mesh.x_max);
    std::uniform_real_distribution<double> uy(mesh.y_min, mesh.y_max);
    std::uniform_real_distribution<double> uz(mesh.z_min, mesh.z_max);
    const std::array<double, 3> center = {(mesh.x_min + mesh.x_max) / 2.0,
                                          (mesh.y_min + mesh.y_max) / 2.0,
                                          (mesh.z_min + mesh.z_max) / 2.0};

    std::vector<CellAgent> agents;
    agents.reserve(static_cast<std::size_t>(ia.count));
    for (std::int64_t i = 0; i < ia.count; ++i) {
        CellAgent a;
        a.id = i;
        a.volume = ia.volume;
        a.secretion_rates = secretion;
        a.uptake_rates = uptake;
        a.saturation_densities = targets;
        a.position = (ia.placement == "center")
                         ? center
                         : std::array<double, 3>{ux(rng), uy(rng), uz(rng)};
        agents.push_back(std::move(a));
    }
    return AgentPopulation(std::move(agents), mesh, S);
}

} // namespace biodiff
