// Copyright (c) the ELIC codec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "elic/cli.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

#include "elic/bitstream.h"
#include "elic/codec.h"
#include "elic/image_io.h"
#include "elic/model.h"
#include "elic/status.h"
#include "elic/weights.h"

namespace elic {
namespace {

using nlohmann::ordered_json;

struct ModelFlags {
  std::string weights;
  std::optional<uint64_t> seed;
  std::string variant = "elic";
  size_t n = 192;
  size_t m = 320;
};

void AddModelFlags(CLI::App* cmd, ModelFlags& flags) {
  auto* w = cmd->add_option("--weights", flags.weights, "weight archive (.elwt)");
  auto* s = cmd->add_option("--seed", flags.seed, "use seeded random weights");
  w->excludes(s);
  s->excludes(w);
  cmd->add_option("--variant", flags.variant, "elic or elic-sm")
      ->check(CLI::IsMember({"elic", "elic-sm"}));
  cmd->add_option("--n", flags.n, "feature width (seeded mode)");
  cmd->add_option("--m", flags.m, "latent channels (seeded mode)");
}

Codec MakeCodec(const ModelFlags& flags, const CLI::App* cmd) {
  const Variant variant = ParseVariant(flags.variant);
  if (!flags.weights.empty()) {
    WeightStore store = WeightStore::Load(flags.weights);
    ModelConfig config = ConfigForWeights(store.header());
    if (cmd->count("--variant") && config.variant != variant) {
      Fail(ErrorCode::kWeightMismatch,
           std::string("weights are for variant ") + VariantName(config.variant));
    }
    return Codec(config, store);
  }
  if (!flags.seed) {
    Fail(ErrorCode::kInvalidArgument, "one of --weights or --seed is required");
  }
  ModelConfig config = MakeConfig(variant, flags.n, flags.m);
  return Codec(config, RandomWeights(config, *flags.seed));
}

std::vector<uint8_t> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteFile(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path);
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Rounds for schema-stable JSON output.
double Round(double v, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::round(v * scale) / scale;
}

ordered_json InspectJson(const std::vector<uint8_t>& bytes) {
  const Bitstream bs = Bitstream::Parse(bytes);
  ordered_json j;
  j["file_bytes"] = bytes.size();
  j["header"] = {{"version", bs.header.version},
                 {"variant", VariantName(static_cast<Variant>(bs.header.variant))},
                 {"width", bs.header.width},
                 {"height", bs.header.height},
                 {"bytes", kBitstreamHeaderBytes}};
  j["z_segment"] = {{"payload_bytes", bs.z_segment.size()},
                    {"bytes", bs.z_segment.size() + kSegmentPrefixBytes}};
  ordered_json passes = ordered_json::array();
  for (size_t i = 0; i < bs.pass_segments.size(); ++i) {
    passes.push_back({{"index", i},
                      {"group", i / 2 + 1},
                      {"phase", i % 2 == 0 ? "anchor" : "non-anchor"},
                      {"payload_bytes", bs.pass_segments[i].size()},
                      {"bytes", bs.pass_segments[i].size() + kSegmentPrefixBytes}});
  }
  j["pass_segments"] = passes;
  const double pixels =
      static_cast<double>(bs.header.width) * static_cast<double>(bs.header.height);
  j["bpp"] = pixels > 0 ? Round(8.0 * bytes.size() / pixels, 6) : 0.0;
  return j;
}

ordered_json ReportJson(const CompactionReport& report) {
  ordered_json j;
  j["latent_height"] = report.height;
  j["latent_width"] = report.width;
  j["total_bits"] = Round(report.total_bits, 3);
  ordered_json channels = ordered_json::array();
  for (const ChannelStats& c : report.channels) {
    channels.push_back({{"channel", c.channel},
                        {"energy", Round(c.energy, 6)},
                        {"bits", Round(c.bits, 3)}});
  }
  j["channels"] = channels;
  return j;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCorruptBitstream:
    case ErrorCode::kInsufficientData:
      return kExitCorrupt;
    case ErrorCode::kUnsupportedFormat:
    case ErrorCode::kWeightMismatch:
      return kExitMismatch;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kIo:
      return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"ELIC learned image codec"};
  app.require_subcommand(1, 1);

  ModelFlags model;
  std::string input, output, reference, fill = "zero", dump;
  size_t k = 0;
  bool json = false;

  auto* encode = app.add_subcommand("encode", "compress an image");
  encode->add_option("input", input)->required();
  encode->add_option("-o,--output", output)->required();
  AddModelFlags(encode, model);

  auto* decode = app.add_subcommand("decode", "decompress a bitstream");
  decode->add_option("input", input)->required();
  decode->add_option("-o,--output", output)->required();
  decode->add_option("--reference", reference, "original image for PSNR");
  AddModelFlags(decode, model);

  auto* thumb = app.add_subcommand("thumbnail", "half-resolution preview");
  thumb->add_option("input", input)->required();
  thumb->add_option("-o,--output", output)->required();
  AddModelFlags(thumb, model);

  auto* prog = app.add_subcommand("progressive", "decode the first k chunks");
  prog->add_option("input", input)->required();
  prog->add_option("-o,--output", output);
  prog->add_option("--k", k, "number of chunks")->required();
  prog->add_option("--fill", fill)->check(CLI::IsMember({"zero", "mean"}));
  AddModelFlags(prog, model);

  auto* inspect = app.add_subcommand("inspect", "print header and segment sizes");
  inspect->add_option("input", input)->required();
  inspect->add_flag("--json", json);

  auto* analyze = app.add_subcommand("analyze", "latent energy compaction");
  analyze->add_option("input", input)->required();
  analyze->add_flag("--json", json);
  analyze->add_option("--dump", dump, "write a magnitude map (PGM/PNG)");
  AddModelFlags(analyze, model);

  auto* selftest = app.add_subcommand("selftest", "seeded round-trip check");
  AddModelFlags(selftest, model);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*encode) {
      const Codec codec = MakeCodec(model, encode);
      const Tensor image = ReadImage(input);
      const EncodeOutput enc = codec.Encode(image);
      WriteFile(output, enc.bytes);
      const DecodeOutput dec = codec.Decode(enc.bytes);
      const double bpp = 8.0 * enc.bytes.size() /
                         static_cast<double>(image.height() * image.width());
      out << "bytes " << enc.bytes.size() << "\n";
      out << "bpp " << Fixed(bpp, 4) << "\n";
      out << "psnr " << Fixed(Psnr(image, dec.image), 2) << "\n";
    } else if (*decode) {
      const Codec codec = MakeCodec(model, decode);
      const std::vector<uint8_t> bytes = ReadFile(input);
      const DecodeOutput dec = codec.Decode(bytes);
      WriteImage(output, dec.image);
      out << "size " << dec.image.width() << "x" << dec.image.height() << "\n";
      if (!reference.empty()) {
        out << "psnr " << Fixed(Psnr(ReadImage(reference), dec.image), 2)
            << "\n";
      }
    } else if (*thumb) {
      const Codec codec = MakeCodec(model, thumb);
      const std::vector<uint8_t> bytes = ReadFile(input);
      BitstreamReader reader(bytes);
      const Tensor t = codec.DecodeThumbnail(reader);
      WriteImage(output, t);
      out << "size " << t.width() << "x" << t.height() << "\n";
      out << "bytes_read " << reader.bytes_touched() << "\n";
    } else if (*prog) {
      const Codec codec = MakeCodec(model, prog);
      const std::vector<uint8_t> bytes = ReadFile(input);
      BitstreamReader reader(bytes);
      ProgressiveOptions options;
      options.fill = fill == "mean" ? FillMode::kMean : FillMode::kZero;
      const ProgressiveOutput p = codec.DecodeProgressive(reader, k, options);
      if (!output.empty()) WriteImage(output, p.image);
      out << "size " << p.image.width() << "x" << p.image.height() << "\n";
      out << "groups " << k << "\n";
      out << "bytes_read " << reader.bytes_touched() << "\n";
    } else if (*inspect) {
      const ordered_json j = InspectJson(ReadFile(input));
      if (json) {
        out << j.dump(2) << "\n";
      } else {
        out << "variant " << j["header"]["variant"].get<std::string>() << "\n";
        out << "size " << j["header"]["width"] << "x" << j["header"]["height"]
            << "\n";
        out << "header " << kBitstreamHeaderBytes << " bytes\n";
        out << "z " << j["z_segment"]["bytes"] << " bytes\n";
        for (const auto& p : j["pass_segments"]) {
          out << "pass " << p["index"] << " group " << p["group"] << " "
              << p["phase"].get<std::string>() << " " << p["bytes"]
              << " bytes\n";
        }
        out << "total " << j["file_bytes"] << " bytes\n";
      }
    } else if (*analyze) {
      const Codec codec = MakeCodec(model, analyze);
      const Tensor image = ReadImage(input);
      const CompactionReport report = codec.AnalyzeCompaction(image);
      if (!dump.empty()) {
        const EncodeOutput enc = codec.Encode(image);
        const Tensor mags = CompactionMagnitudes(enc.y_hat);
        // Channels side by side, in index order.
        const size_t h = mags.height(), w = mags.width();
        Tensor sheet(Shape{1, h, w * mags.channels()});
        for (size_t c = 0; c < mags.channels(); ++c) {
          for (size_t y = 0; y < h; ++y) {
            for (size_t x = 0; x < w; ++x) {
              sheet.at(0, y, c * w + x) = mags.at(c, y, x);
            }
          }
        }
        WriteImage(dump, sheet);
      }
      if (json) {
        out << ReportJson(report).dump(2) << "\n";
      } else {
        out << FormatCompactionReport(report);
      }
    } else if (*selftest) {
      if (!model.weights.empty()) {
        Fail(ErrorCode::kInvalidArgument, "selftest uses --seed only");
      }
      ModelFlags seeded = model;
      if (!selftest->count("--seed")) seeded.seed = 1;
      if (!selftest->count("--n")) seeded.n = 16;
      if (!selftest->count("--m")) seeded.m = 144;
      const Codec codec = MakeCodec(seeded, selftest);
      Tensor image(Shape{3, 37, 53});
      for (size_t c = 0; c < 3; ++c) {
        for (size_t y = 0; y < image.height(); ++y) {
          for (size_t x = 0; x < image.width(); ++x) {
            image.at(c, y, x) = static_cast<float>(
                0.5 + 0.4 * std::sin(0.21 * x + 0.13 * y + 1.7 * c));
          }
        }
      }
      const EncodeOutput enc = codec.Encode(image);
      const DecodeOutput dec = codec.Decode(enc.bytes);
      const bool ok = dec.y_hat == enc.y_hat &&
                      dec.image.shape() == image.shape() &&
                      dec.image.AllFinite();
      out << (ok ? "PASS" : "FAIL") << " round-trip " << enc.bytes.size()
          << " bytes\n";
      return ok ? kExitOk : kExitCorrupt;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace elic
