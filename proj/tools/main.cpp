// Copyright 2026 The Poimsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// poimsim: batch front end for the on-chain ML defense simulator.
// Subcommands wire the library modules into reproducible experiments; all
// randomness flows from the seed in the run configuration.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "poimsim/analysis.hpp"
#include "poimsim/bridge.hpp"
#include "poimsim/chainsim.hpp"
#include "poimsim/dataset.hpp"
#include "poimsim/gascost.hpp"
#include "poimsim/inference.hpp"
#include "poimsim/poim.hpp"

namespace {

using json = nlohmann::json;
using namespace poimsim;

constexpr int kExitError = 1;
constexpr int kExitRejected = 3;

std::vector<std::uint8_t> read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Err::kEmptyInput, "cannot open '" + path + "'");
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_binary(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Err::kEmptyInput, "cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Err::kEmptyInput, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(Err::kParseError, "bad JSON in '" + path + "': " + e.what());
    }
}

inference::ModelArch parse_arch(const json& spec, int default_input_dim) {
    const std::string kind = spec.value("kind", spec.value("arch", ""));
    const int input_dim = spec.value("input_dim", default_input_dim);
    if (kind == "linear") return inference::ModelArch::linear(input_dim);
    if (kind == "mlp") {
        std::vector<int> layers = spec.value("layers", std::vector<int>{});
        if (layers.empty()) fail(Err::kConfigError, "mlp arch needs a 'layers' list");
        return inference::ModelArch::mlp(input_dim, std::move(layers));
    }
    if (kind == "cnn1d" || kind == "cnn") {
        return inference::ModelArch::cnn1d(input_dim, spec.value("filters", 0), spec.value("kernel", 0));
    }
    if (kind == "rnn") {
        return inference::ModelArch::rnn(input_dim, spec.value("units", 0), spec.value("timesteps", 0));
    }
    if (kind == "tree") {
        std::vector<inference::TreeNode> nodes;
        for (const json& node : spec.at("nodes")) {
            inference::TreeNode tree_node;
            if (node.contains("leaf")) {
                tree_node.label = node.at("leaf").get<int>();
            } else {
                tree_node.feature = node.at("feature").get<int>();
                tree_node.left = node.at("left").get<int>();
                tree_node.right = node.at("right").get<int>();
            }
            nodes.push_back(tree_node);
        }
        return inference::ModelArch::decision_tree(input_dim, std::move(nodes));
    }
    fail(Err::kConfigError, "unknown architecture kind '" + kind + "'");
}

inference::FloatModel parse_float_model(const json& doc) {
    inference::FloatModel model;
    model.arch = parse_arch(doc.at("arch"), doc.at("arch").value("input_dim", 0));
    if (model.arch.kind == inference::ArchKind::kDecisionTree) {
        for (const json& node : doc.at("arch").at("nodes")) {
            model.weights.push_back(node.value("threshold", 0.0));
        }
    } else {
        model.weights = doc.at("weights").get<std::vector<double>>();
        model.biases = doc.at("biases").get<std::vector<double>>();
    }
    model.validate();
    return model;
}

std::vector<fixedpoint::Int128> parse_vector(const std::string& text, fixedpoint::Scale scale) {
    std::vector<fixedpoint::Int128> values;
    std::istringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        values.push_back(fixedpoint::to_fixed_decimal(item, scale));
    }
    return values;
}

struct LoadedConfig {
    chainsim::Setup setup;
    dataset::EncodedDataset encoded;
};

LoadedConfig load_config(const std::string& path) {
    const json doc = read_json(path);
    LoadedConfig loaded;
    chainsim::Setup& setup = loaded.setup;

    setup.seed = doc.value("seed", 1ULL);
    setup.scale = fixedpoint::Scale::pow10(doc.value("scale_exponent", 12));

    const json protocol = doc.value("protocol", json::object());
    poim::ProtocolParams& params = setup.params;
    params.min_stake = protocol.value("min_stake", 1);
    params.alpha_acc = protocol.value("alpha_acc", 0);
    params.alpha_prec = protocol.value("alpha_prec", 0);
    params.alpha_rec = protocol.value("alpha_rec", 0);
    params.alpha_f1 = protocol.value("alpha_f1", 0);
    params.imbalance_rho = protocol.value("imbalance_rho", 5);
    params.challenge_window_seconds = protocol.value("challenge_window_seconds", 86'400ULL);
    const double quorum = protocol.value("quorum", 0.5);
    if (quorum < 0.0 || quorum > 1.0) fail(Err::kConfigError, "quorum must lie in [0, 1]");
    params.quorum_num = static_cast<std::int64_t>(std::llround(quorum * 10'000));
    params.quorum_den = 10'000;
    params.eta_raw = fixedpoint::to_fixed(protocol.value("eta", 0.5), setup.scale);
    params.prior_depth = protocol.value("prior_depth", std::size_t{16});
    params.metric_scale = doc.value("metric_scale", poim::kDefaultMetricScale);

    const json data = doc.value("data", json::object());
    std::vector<dataset::TxFeatureVector> records;
    if (data.contains("path")) {
        records = dataset::ingest_file(data.at("path").get<std::string>());
    } else {
        const json synth = data.value("synth", json::object());
        records = dataset::synth_generate(synth.value("n_normal", 100), synth.value("n_attack", 100),
                                          synth.value("separation", 10.0), setup.seed);
    }
    const dataset::SplitDataset split = dataset::temporal_split(std::move(records), data.value("test_fraction", 0.3));
    loaded.encoded = dataset::standardize_encode(split, setup.scale);

    for (const dataset::EncodedSample& s : loaded.encoded.test) {
        setup.test_set.samples.push_back(poim::TestSample{s.features, s.label});
    }
    for (const dataset::EncodedSample& s : loaded.encoded.train) {
        setup.train_pool.push_back(poim::TestSample{s.features, s.label});
    }

    setup.arch = doc.contains("model") ? parse_arch(doc.at("model"), dataset::kFeatureCount)
                                       : inference::ModelArch::linear(dataset::kFeatureCount);

    const json accounts = doc.value("accounts", json::object());
    for (const auto& [name, balance] : accounts.items()) {
        setup.initial_accounts[name] = balance.get<poim::Token>();
    }
    return loaded;
}

int cmd_quantize(const std::string& model_path, int scale_exponent, const std::string& out_path) {
    const inference::FloatModel model = parse_float_model(read_json(model_path));
    const fixedpoint::Scale scale = fixedpoint::Scale::pow10(scale_exponent);
    const inference::QuantizedModel quantized = inference::quantize(model, scale);
    const std::vector<std::uint8_t> bytes = bridge::serialize(quantized);
    write_binary(out_path, bytes);
    std::cout << "model_id=" << quantized.arch.id() << '\n'
              << "scale=1e" << scale.exponent << '\n'
              << "bytes=" << bytes.size() << '\n'
              << "hash=0x" << bridge::to_hex(bridge::keccak256(bytes)) << '\n';
    return 0;
}

int cmd_inspect(const std::string& model_path) {
    const std::vector<std::uint8_t> bytes = read_binary(model_path);
    const inference::QuantizedModel model = bridge::deserialize(bytes);
    std::cout << "model_id=" << model.arch.id() << '\n'
              << "version=" << model.version << '\n'
              << "scale=1e" << model.scale.exponent << '\n'
              << "hash=0x" << bridge::to_hex(bridge::keccak256(bytes)) << '\n';
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
        std::cout << "w[" << i << "]=" << model.weights[i] << '\n';
    }
    for (std::size_t i = 0; i < model.biases.size(); ++i) {
        std::cout << "b[" << i << "]=" << model.biases[i] << '\n';
    }
    return 0;
}

int cmd_infer(const std::string& model_path, const std::string& vector_text, double gas_price_gwei,
              double token_usd) {
    const inference::QuantizedModel model = bridge::deserialize(read_binary(model_path));
    const std::vector<fixedpoint::Int128> x = parse_vector(vector_text, model.scale);
    const int label = inference::classify_input(x, model);
    std::cout << "label=" << label << '\n';
    if (model.arch.kind != inference::ArchKind::kDecisionTree) {
        std::cout << "logit_raw=" << inference::forward_logit(x, model) << '\n';
    }
    gascost::GasReport report = gascost::gas_for_model(model);
    if (gas_price_gwei > 0.0 && token_usd > 0.0) {
        report.usd_cost = gascost::gas_to_usd(report.total, gas_price_gwei, token_usd);
    }
    std::cout << report.to_text();
    return 0;
}

int cmd_gascost(const std::string& arch_kind, int d, int filters, int kernel, int units, int timesteps,
                const std::string& layers_text, double gas_price_gwei, double token_usd) {
    gascost::GasReport report;
    if (arch_kind == "rnn") {
        // The closed-form bound permits T > d (inputs zero-pad to T words),
        // so it is evaluated directly rather than through a model instance.
        if (units < 1 || timesteps < 1) fail(Err::kConfigError, "rnn needs --units and --timesteps");
        report.model_id = "rnn-u" + std::to_string(units) + "-t" + std::to_string(timesteps) + "-d" +
                          std::to_string(d);
        report.analytic_gas = gascost::gas_rnn(d, units, timesteps);
        report.total = report.analytic_gas + report.base_tx_gas;
        report.within_block_limit = report.total <= gascost::kBlockGasLimit;
    } else {
        json spec;
        spec["kind"] = arch_kind;
        spec["input_dim"] = d;
        if (!layers_text.empty()) {
            std::vector<int> layers;
            std::istringstream stream(layers_text);
            std::string item;
            while (std::getline(stream, item, ',')) layers.push_back(std::stoi(item));
            spec["layers"] = layers;
        }
        spec["filters"] = filters;
        spec["kernel"] = kernel;
        spec["units"] = units;
        spec["timesteps"] = timesteps;
        report = gascost::gas_for_arch(parse_arch(spec, d));
    }
    if (gas_price_gwei > 0.0 && token_usd > 0.0) {
        report.usd_cost = gascost::gas_to_usd(report.total, gas_price_gwei, token_usd);
    }
    std::cout << report.to_text();
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& scenario_path,
                 const std::string& history_path, const std::string& encoded_path) {
    // The one environment override: POIMSIM_CONFIG replaces the config path.
    const char* env_config = std::getenv("POIMSIM_CONFIG");
    LoadedConfig loaded = load_config(env_config != nullptr ? std::string(env_config) : config_path);
    if (!encoded_path.empty()) {
        std::ofstream out(encoded_path);
        dataset::write_encoded_csv(out, loaded.encoded);
    }
    chainsim::Simulation sim(std::move(loaded.setup));
    const chainsim::Scenario scenario = chainsim::Scenario::parse_file(scenario_path);
    const chainsim::ScenarioResult result = chainsim::run_scenario(sim, scenario);
    for (const std::string& line : result.log_lines) std::cout << line << '\n';
    for (const std::string& line : result.bench_lines) std::cout << line << '\n';
    std::cout << "state_hash=0x" << bridge::to_hex(sim.state_hash()) << '\n';
    if (!history_path.empty()) {
        std::ofstream out(history_path);
        for (const poim::HistoryRecord& record : sim.governance().history()) out << record.to_line() << '\n';
        for (const chainsim::Event& event : sim.l2().events) out << "l2 " << event.to_line() << '\n';
        for (const chainsim::Event& event : sim.l1().events) out << "l1 " << event.to_line() << '\n';
    }
    return 0;
}

int cmd_bridge_verify(const std::string& l2_path, const std::string& l1_path) {
    const std::vector<std::uint8_t> l2_bytes = read_binary(l2_path);
    const inference::QuantizedModel l2_model = bridge::deserialize(l2_bytes);

    bridge::L1InferenceContract contract;
    contract.record_commitment(bridge::Commitment{bridge::keccak256(l2_bytes), 0});

    const std::vector<std::uint8_t> payload = read_binary(l1_path);
    if (contract.transfer_and_verify(payload) == bridge::TransferStatus::kRejected) {
        std::cout << "decision=Rejected reason=HashMismatch\n";
        return kExitRejected;
    }
    bridge::assert_model_fields_equal(*contract.model(), l2_model);
    std::cout << "decision=Accepted version=" << contract.model()->version << '\n';
    return 0;
}

int cmd_cluster(const std::string& data_path, int k, std::uint64_t seed, const std::string& points_path,
                const std::string& report_path) {
    const std::vector<dataset::TxFeatureVector> records = dataset::ingest_file(data_path);
    if (records.empty()) fail(Err::kEmptyInput, "no records in '" + data_path + "'");
    // The six non-temporal features form the analysis matrix; the timestamp
    // interleaves classes by construction and would only add noise.
    analysis::Matrix points;
    points.reserve(records.size());
    for (const dataset::TxFeatureVector& r : records) {
        points.push_back({static_cast<double>(r.gas), static_cast<double>(r.func_selector_encoded),
                          static_cast<double>(r.chain_id_encoded), static_cast<double>(r.sender_encoded),
                          static_cast<double>(r.origin_encoded), static_cast<double>(r.to_encoded)});
    }
    const analysis::ClusterReport report = analysis::cluster_pipeline(points, k, seed);
    std::cout << report.to_text();
    if (!points_path.empty()) {
        std::ofstream out(points_path);
        report.write_points_csv(out);
    }
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << report.to_text();
    }
    return 0;
}

int cmd_synth(int n_normal, int n_attack, double separation, std::uint64_t seed, const std::string& out_path) {
    const std::vector<dataset::TxFeatureVector> records =
        dataset::synth_generate(n_normal, n_attack, separation, seed);
    std::ofstream out(out_path);
    if (!out) fail(Err::kEmptyInput, "cannot open '" + out_path + "' for writing");
    dataset::write_csv(out, records);
    std::cout << "records=" << records.size() << " path=" << out_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"poimsim: deterministic on-chain ML defense simulator"};
    app.require_subcommand(1);

    // quantize
    std::string model_json;
    int scale_exponent = 12;
    std::string out_file;
    CLI::App* quantize = app.add_subcommand("quantize", "Quantize a float model file to the binary model format");
    quantize->add_option("model", model_json, "Float model JSON file")->required();
    quantize->add_option("--scale", scale_exponent, "Scale exponent in [1,18] (S = 10^e)");
    quantize->add_option("--out", out_file, "Output model file")->required();

    // inspect
    std::string inspect_file;
    CLI::App* inspect = app.add_subcommand("inspect", "Print the parameters of a binary model file");
    inspect->add_option("model", inspect_file, "Binary model file")->required();

    // infer
    std::string infer_model;
    std::string infer_vector;
    double gas_price_gwei = 0.0;
    double token_usd = 0.0;
    CLI::App* infer = app.add_subcommand("infer", "Classify a feature vector with a binary model");
    infer->add_option("model", infer_model, "Binary model file")->required();
    infer->add_option("--vector", infer_vector, "Comma-separated decimal features")->required();
    infer->add_option("--gas-price-gwei", gas_price_gwei, "Gas price for the USD estimate");
    infer->add_option("--token-usd", token_usd, "Native token USD price");

    // gascost
    std::string arch_kind;
    int dim = 3;
    int filters = 0;
    int kernel = 0;
    int units = 0;
    int timesteps = 0;
    std::string layers_text;
    CLI::App* gascost_cmd = app.add_subcommand("gascost", "Analytic gas bound for an architecture");
    gascost_cmd->add_option("--arch", arch_kind, "linear | mlp | cnn1d | rnn")->required();
    gascost_cmd->add_option("--d", dim, "Input dimension");
    gascost_cmd->add_option("--filters", filters, "CNN filters");
    gascost_cmd->add_option("--kernel", kernel, "CNN kernel size");
    gascost_cmd->add_option("--units", units, "RNN units");
    gascost_cmd->add_option("--timesteps", timesteps, "RNN timesteps");
    gascost_cmd->add_option("--layers", layers_text, "MLP layer sizes, comma separated");
    gascost_cmd->add_option("--gas-price-gwei", gas_price_gwei, "Gas price for the USD estimate");
    gascost_cmd->add_option("--token-usd", token_usd, "Native token USD price");

    // simulate
    std::string config_path;
    std::string scenario_path;
    std::string history_path;
    std::string encoded_path;
    CLI::App* simulate = app.add_subcommand("simulate", "Run a scripted two-ledger simulation");
    simulate->add_option("config", config_path, "Run configuration JSON (POIMSIM_CONFIG overrides)")->required();
    simulate->add_option("scenario", scenario_path, "Scenario script")->required();
    simulate->add_option("--history", history_path, "Write governance history and event logs here");
    simulate->add_option("--export-encoded", encoded_path, "Write the encoded dataset CSV here");

    // bridge-verify
    std::string l2_path;
    std::string l1_path;
    CLI::App* bridge_verify = app.add_subcommand("bridge-verify", "Commit an L2 model and verify an L1 payload");
    bridge_verify->add_option("--l2", l2_path, "L2 model export (binary model file)")->required();
    bridge_verify->add_option("--l1", l1_path, "L1 payload to verify")->required();

    // cluster
    std::string data_path;
    int k = 3;
    std::uint64_t seed = 1;
    std::string points_path;
    std::string report_path;
    CLI::App* cluster = app.add_subcommand("cluster", "PCA + KMeans separability report for a dataset CSV");
    cluster->add_option("data", data_path, "Dataset CSV")->required();
    cluster->add_option("--k", k, "Cluster count");
    cluster->add_option("--seed", seed, "Seeding RNG");
    cluster->add_option("--out-points", points_path, "Projected coordinates CSV");
    cluster->add_option("--report", report_path, "Report text file");

    // synth
    int n_normal = 100;
    int n_attack = 100;
    double separation = 10.0;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic transaction dataset CSV");
    synth->add_option("--n-normal", n_normal, "Normal sample count");
    synth->add_option("--n-attack", n_attack, "Attack sample count");
    synth->add_option("--separation", separation, "Cluster separation in within-cluster sigmas");
    synth->add_option("--seed", seed, "Generator seed");
    synth->add_option("--out", out_file, "Output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (quantize->parsed()) return cmd_quantize(model_json, scale_exponent, out_file);
        if (inspect->parsed()) return cmd_inspect(inspect_file);
        if (infer->parsed()) return cmd_infer(infer_model, infer_vector, gas_price_gwei, token_usd);
        if (gascost_cmd->parsed()) {
            return cmd_gascost(arch_kind, dim, filters, kernel, units, timesteps, layers_text, gas_price_gwei,
                               token_usd);
        }
        if (simulate->parsed()) return cmd_simulate(config_path, scenario_path, history_path, encoded_path);
        if (bridge_verify->parsed()) return cmd_bridge_verify(l2_path, l1_path);
        if (cluster->parsed()) return cmd_cluster(data_path, k, seed, points_path, report_path);
        if (synth->parsed()) return cmd_synth(n_normal, n_attack, separation, seed, out_file);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
