#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hgcml/error.hpp"
#include "hgcml/pipeline.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

hgcml::RunConfig resolve(const Common& c) {
  hgcml::RunConfig cfg = hgcml::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out_dir = std::filesystem::absolute(c.out).string();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metapath-view contrastive node embeddings for heterogeneous graphs"};
  app.require_subcommand(1);

  Common common;
  const auto add_common = [&common](CLI::App* sub, bool needs_config) {
    if (needs_config) sub->add_option("--config", common.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, needs_config ? "Override the config seed" : "Generator seed");
    sub->add_option("--out", common.out, "Override the output directory");
  };

  auto* prepare = app.add_subcommand("prepare", "Load the network, extract metapath views, write the view cache");
  auto* positives = app.add_subcommand("positives", "Select topology and semantic positives -> positives.tsv");
  auto* train = app.add_subcommand("train", "Train the encoders -> model.bin, trace.tsv");
  auto* embed = app.add_subcommand("embed", "Export fused embeddings -> embeddings.bin");
  auto* eval = app.add_subcommand("eval", "Linear probe micro-F1 and k-means NMI -> report.tsv");
  for (auto* sub : {prepare, positives, train, embed, eval}) add_common(sub, true);

  auto* synth = app.add_subcommand("synth", "Generate a planted-block synthetic dataset and config.json");
  hgcml::SynthConfig synth_cfg;
  add_common(synth, false);
  synth->add_option("--blocks", synth_cfg.blocks, "Number of planted blocks")->capture_default_str();
  synth->add_option("--size", synth_cfg.block_size, "Target nodes per block")->capture_default_str();
  synth->add_option("--metapaths", synth_cfg.metapaths, "Number of metapaths")->capture_default_str();
  synth->add_option("--p-intra", synth_cfg.p_intra, "Within-block metapath edge probability")->capture_default_str();
  synth->add_option("--p-inter", synth_cfg.p_inter, "Cross-block metapath edge probability")->capture_default_str();
  synth->add_option("--feature-dim", synth_cfg.feature_dim, "Feature dimension")->capture_default_str();
  synth->add_option("--feature-shift", synth_cfg.feature_shift, "Block mean shift")->capture_default_str();
  synth->add_option("--noise", synth_cfg.feature_noise, "Feature noise scale")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      if (common.seed) synth_cfg.seed = *common.seed;
      hgcml::cmd_synth(synth_cfg, common.out.empty() ? std::filesystem::path("synth") : std::filesystem::path(common.out),
                       std::cerr);
      return 0;
    }
    const hgcml::RunConfig cfg = resolve(common);
    if (prepare->parsed()) hgcml::cmd_prepare(cfg, std::cerr);
    if (positives->parsed()) hgcml::cmd_positives(cfg, std::cerr);
    if (train->parsed()) hgcml::cmd_train(cfg, std::cerr);
    if (embed->parsed()) hgcml::cmd_embed(cfg, std::cerr);
    if (eval->parsed()) {
      const auto report = hgcml::cmd_eval(cfg, std::cerr);
      std::cout << "micro_f1\t" << report.micro_f1.mean << '\t' << report.micro_f1.std << '\n'
                << "nmi\t" << report.nmi.mean << '\t' << report.nmi.std << '\n';
    }
  } catch (const hgcml::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hgcml::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
