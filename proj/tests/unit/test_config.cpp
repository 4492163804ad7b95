#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cfr/config.hpp"

using namespace cfr;
namespace fs = std::filesystem;

namespace {

RunConfig parse_text(const std::string& text) {
  const fs::path path = fs::temp_directory_path() / "cfr_config_test.cfg";
  std::ofstream os(path);
  os << text;
  os.close();
  return RunConfig::from_file(path.string());
}

}  // namespace

TEST_CASE("defaults validate and resolve") {
  RunConfig cfg;
  cfg.validate();
  const std::string text = cfg.resolved();
  CHECK(text.find("image_size = 96") != std::string::npos);
  CHECK(text.find("loops = 3") != std::string::npos);
  CHECK(text.find("loop_counts = 0,1,2,3,4") != std::string::npos);
  CHECK(text.find("n_seeds = 5") != std::string::npos);
  CHECK(text.find("seg_weight = 1") != std::string::npos);
}

TEST_CASE("config files parse key = value lines with comments") {
  RunConfig cfg = parse_text(
      "# trainer settings\n"
      "lr = 0.01\n"
      "epochs = 7   # short run\n"
      "fusion = max\n"
      "stem_channels = 8,16\n"
      "loop_counts = 0,3\n"
      "augment = false\n"
      "\n");
  CHECK(cfg.lr == doctest::Approx(0.01));
  CHECK(cfg.epochs == 7);
  CHECK(cfg.fusion == "max");
  CHECK(cfg.stem_channels == std::vector<int>{8, 16});
  CHECK(cfg.loop_counts == std::vector<int>{0, 3});
  CHECK(cfg.augment == false);
}

TEST_CASE("unknown keys are hard errors") {
  CHECK_THROWS_AS(parse_text("lrr = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("seed 5\n"), ConfigError);  // missing '='
}

TEST_CASE("value types are validated") {
  CHECK_THROWS_AS(parse_text("epochs = soon\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("lr = fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("augment = yes\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("loop_counts = \n"), ConfigError);
}

TEST_CASE("semantic validation catches inconsistent settings") {
  RunConfig cfg;
  cfg.p_both = 0.5;
  cfg.p_visible_only = 0.1;
  cfg.p_thermal_only = 0.1;
  CHECK_THROWS_AS(cfg.validate(), ContractError);

  RunConfig cfg2;
  cfg2.fusion = "blend";
  CHECK_THROWS_AS(cfg2.validate(), ConfigError);

  RunConfig cfg3;
  cfg3.preset = "vehicles";
  CHECK_THROWS_AS(cfg3.validate(), ConfigError);

  RunConfig cfg4;
  cfg4.iou_pos = 0.3;
  cfg4.iou_neg = 0.4;
  CHECK_THROWS_AS(cfg4.validate(), ContractError);
}

TEST_CASE("resolved text round-trips through the parser") {
  RunConfig cfg;
  cfg.lr = 0.025;
  cfg.seed = 987654321;
  cfg.loop_counts = {0, 2, 4};
  cfg.fusion = "concat_conv";
  cfg.p_both = 0.6;
  cfg.p_visible_only = 0.15;
  cfg.p_thermal_only = 0.25;
  RunConfig back = parse_text(cfg.resolved());
  CHECK(back.resolved() == cfg.resolved());
}

TEST_CASE("model_config wires the fusion point consistently") {
  RunConfig cfg;
  cfg.channels = 24;
  cfg.loops = 2;
  const ModelConfig mc = cfg.model_config();
  CHECK(mc.backbone.fusion_channels == 24);
  CHECK(mc.cfr.channels == 24);
  CHECK(mc.cfr.loops == 2);
  CHECK(mc.preset.num_classes == 1);
}

TEST_CASE("reasonable height derives from the image size by default") {
  RunConfig cfg;
  CHECK(cfg.resolved_min_height() == doctest::Approx(96.0 * 55.0 / 512.0));
  cfg.reasonable_min_height = 12.0;
  CHECK(cfg.resolved_min_height() == 12.0);
}
