// Copyright 2026 The ECAT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: training, coding, evaluation and self-test.
//
// Exit codes: 0 success, 1 contract violation (bad input, bad stream, failed
// check), 2 I/O error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ecat/entropy/range_coder.hpp"
#include "ecat/eval/dataset.hpp"
#include "ecat/eval/image_io.hpp"
#include "ecat/eval/metrics.hpp"
#include "ecat/io_audit.hpp"
#include "ecat/model/codec.hpp"
#include "ecat/nn/gradcheck.hpp"
#include "ecat/nn/ops.hpp"
#include "ecat/train/checkpoint.hpp"
#include "ecat/train/loss.hpp"
#include "ecat/train/trainer.hpp"

namespace fs = std::filesystem;
using ecat::nn::DeriveSeed;

namespace ecat {
namespace {

class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string profile = "desk";
  std::uint64_t seed = 0;
  double alpha = -1.0;  // negative: stage default
  double beta = -1.0;
  std::string out;

  std::map<std::string, std::string> kv;

  ModelConfig Model() const {
    ModelConfig cfg = ModelConfig::FromProfile(profile);
    cfg.Apply(kv);
    cfg.Validate();
    return cfg;
  }
  train::TrainConfig Train(train::TrainConfig base) const {
    base.Apply(kv);
    base.seed = seed;
    if (alpha >= 0.0) base.alpha = alpha;
    if (beta >= 0.0) base.beta = beta;
    base.Validate();
    return base;
  }
};

void AddCommon(CLI::App* cmd, Common& c, bool weights) {
  cmd->add_option("--config", c.config, "key=value file (model and training keys)");
  cmd->add_option("--profile", c.profile, "desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--seed", c.seed, "master seed");
  if (weights) {
    cmd->add_option("--alpha", c.alpha, "classification weight");
    cmd->add_option("--beta", c.beta, "distortion weight");
  }
}

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

Model<float> LoadModel(const Common& c, const std::string& ckpt) {
  Model<float> m(c.Model());
  train::LoadCheckpoint(ckpt, m);
  return m;
}

nn::Tensor<float> AsBatch(const eval::Image& img) {
  nn::Tensor<float> t = eval::ToUnitTensor(img);
  return t.Reshaped({1, img.height, img.width, 3});
}

eval::Dataset LoadData(const Common& c, const std::string& manifest) {
  const ModelConfig cfg = c.Model();
  return eval::Ingest(manifest, cfg.num_classes, cfg.input_h, cfg.input_w);
}

void PrintEpoch(const char* stage, const train::EpochLog& l) {
  std::printf("%s epoch %d loss %.5f ce %.5f mse %.3f rate %.4f lr %.3g\n", stage,
              l.epoch, l.loss, l.ce, l.mse, l.rate, l.lr);
  std::fflush(stdout);
}

// --- records ---------------------------------------------------------------

std::vector<eval::MetricRecord> ReadRecords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::vector<eval::MetricRecord> out;
  std::string line;
  std::getline(in, line);
  if (line.rfind("bpp,psnr,top1,alpha,beta,seed", 0) != 0) {
    throw std::invalid_argument(path + ": unexpected header '" + line + "'");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string f[6];
    for (auto& s : f) {
      if (!std::getline(row, s, ',')) throw std::invalid_argument("short row: " + line);
    }
    eval::MetricRecord r;
    r.bpp = std::stod(f[0]);
    r.psnr = std::stod(f[1]);
    r.top1 = std::stod(f[2]);
    r.alpha = std::stod(f[3]);
    r.beta = std::stod(f[4]);
    r.seed = std::stoull(f[5]);
    out.push_back(r);
  }
  return out;
}

// --- commands --------------------------------------------------------------

int Synth(const Common& c, std::size_t count, const std::string& split) {
  const ModelConfig cfg = c.Model();
  const eval::Dataset ds =
      eval::SynthesizeDataset(count, cfg.input_h, cfg.input_w, c.seed);
  std::cout << eval::WriteDataset(ds, c.out, split) << "\n";
  return 0;
}

int TrainStage1(const Common& c, const std::string& data, int epochs, double lr) {
  train::TrainConfig tc = train::TrainConfig::Stage1Defaults();
  if (epochs > 0) tc.epochs = epochs;
  if (lr > 0) tc.lr = lr;
  tc = c.Train(tc);
  const eval::Dataset ds = LoadData(c, data);
  Model<float> m(c.Model());
  m.Init(DeriveSeed(c.seed, {0}));
  train::TrainStage1(m, ds, tc, [](const train::EpochLog& l) { PrintEpoch("stage1", l); });
  fs::create_directories(c.out);
  const std::string path = (fs::path(c.out) / "stage1.ckpt").string();
  train::SaveCheckpoint(path, m, Stage::kPretrain, static_cast<std::uint32_t>(tc.epochs));
  std::cout << path << "\n";
  return 0;
}

int TrainStage2(const Common& c, const std::string& init, const std::string& data,
                int epochs, double lr) {
  train::TrainConfig tc = train::TrainConfig::Stage2Defaults();
  if (epochs > 0) tc.epochs = epochs;
  if (lr > 0) tc.lr = lr;
  tc = c.Train(tc);
  const eval::Dataset ds = LoadData(c, data);
  Model<float> m = LoadModel(c, init);
  train::TrainStage2(m, ds, tc, [](const train::EpochLog& l) { PrintEpoch("stage2", l); });
  fs::create_directories(c.out);
  const std::string path = (fs::path(c.out) / "stage2.ckpt").string();
  train::SaveCheckpoint(path, m, Stage::kFull, static_cast<std::uint32_t>(tc.epochs));
  std::cout << path << "\n";
  return 0;
}

int Compress(const Common& c, const std::string& model, const std::string& in) {
  Model<float> m = LoadModel(c, model);
  const auto bytes = CompressImage(m, AsBatch(eval::ReadPpm(in)));
  const std::string out = c.out.empty() ? fs::path(in).replace_extension(".ecat").string() : c.out;
  train::WriteFileBytes(out, bytes);
  const ModelConfig& cfg = m.config();
  std::printf("%s %zu bytes %.4f bpp\n", out.c_str(), bytes.size(),
              entropy::BitsPerPixel(bytes.size(), cfg.input_h, cfg.input_w));
  return 0;
}

int Decompress(const Common& c, const std::string& model, const std::string& in,
               const std::string& reference) {
  Model<float> m = LoadModel(c, model);
  const std::vector<entropy::LatentPack> packs = {ReadStream(m, train::ReadFileBytes(in))};
  const eval::Image img = eval::FromUnitTensor(
      ReconstructPacks(m, packs).Reshaped({m.config().input_h, m.config().input_w, 3}));
  const std::string out = c.out.empty() ? fs::path(in).replace_extension(".ppm").string() : c.out;
  eval::WritePpm(out, img);
  std::printf("%s\n", out.c_str());
  if (!reference.empty()) {
    std::printf("psnr %.4f\n", eval::Psnr(eval::ReadPpm(reference), img));
  }
  return 0;
}

// Takes a stream and nothing else: the image is unreachable from here, and
// the seal turns any image decode into an error.
int Classify(const Common& c, const std::string& model, const std::string& stream,
             int top, const std::string& audit_path) {
  TakeReadAudit();
  nn::Tensor<float> probs;
  {
    PixelSeal seal;
    Model<float> m = LoadModel(c, model);
    const std::vector<entropy::LatentPack> packs = {
        ReadStream(m, train::ReadFileBytes(stream))};
    probs = ClassifyPacks(m, packs);
  }
  const ReadAudit audit = TakeReadAudit();
  const std::size_t k = probs.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  for (std::size_t i = 0; i < std::min<std::size_t>(static_cast<std::size_t>(top), k); ++i) {
    std::printf("%zu %.9g\n", order[i], static_cast<double>(probs[order[i]]));
  }
  if (!audit_path.empty()) {
    std::ofstream log(audit_path, std::ios::trunc);
    if (!log) throw std::ios_base::failure("cannot write " + audit_path);
    for (const auto& f : audit.files) log << "read " << f << "\n";
    log << "images_decoded " << audit.images_decoded << "\n";
  }
  return 0;
}

int Evaluate(const Common& c, const std::string& model, const std::string& data,
             const std::string& records) {
  Model<float> m = LoadModel(c, model);
  eval::MetricRecord r = eval::Evaluate(m, LoadData(c, data));
  r.alpha = std::max(c.alpha, 0.0);
  r.beta = std::max(c.beta, 0.0);
  r.seed = c.seed;
  r.checkpoint = model;
  const std::vector<eval::MetricRecord> one = {r};
  const std::string csv = eval::CurvesCsv(one);
  std::cout << csv;
  if (!records.empty()) {
    const bool fresh = !fs::exists(records);
    std::ofstream out(records, std::ios::app);
    if (!out) throw std::ios_base::failure("cannot write " + records);
    out << (fresh ? csv : csv.substr(csv.find('\n') + 1));
  }
  return 0;
}

int Ablate(const Common& c, const std::string& model, const std::string& data) {
  Model<float> m = LoadModel(c, model);
  const auto ladder = eval::AblationLadder(m, LoadData(c, data));
  const char* names[4] = {"none", "z1", "z1,z2", "z1,z2,z3"};
  for (int k = 0; k < 4; ++k) {
    std::printf("keep %-9s psnr %.4f\n", names[k], ladder[static_cast<std::size_t>(k)]);
  }
  return 0;
}

int Curves(const Common& c, const std::vector<std::string>& files) {
  std::vector<eval::MetricRecord> all;
  for (const auto& f : files) {
    auto r = ReadRecords(f);
    all.insert(all.end(), r.begin(), r.end());
  }
  eval::EmitCurves(all, c.out);
  std::printf("%zu records -> %s\n", all.size(), c.out.c_str());
  return 0;
}

// --- selftest --------------------------------------------------------------

bool Report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%-28s %s  %s\n", name.c_str(), ok ? "ok  " : "FAIL", detail.c_str());
  std::fflush(stdout);
  return ok;
}

nn::Tensor<double> Gauss(nn::Shape s, nn::Rng& rng) { return rng.NormalTensor<double>(s, 1.0); }

bool CoderSuite(std::uint64_t seed) {
  bool ok = true;
  for (std::uint64_t s = 0; s < 10; ++s) {
    nn::Rng rng(DeriveSeed(seed, {10, s}));
    const int a = 2 + static_cast<int>(rng.Below(300));
    std::vector<double> p(static_cast<std::size_t>(a));
    for (auto& v : p) v = std::exp(2.0 * rng.Normal());
    const entropy::CdfTable t = entropy::QuantizeDistribution(p, -a / 2);
    std::vector<std::int32_t> sym(100000);
    for (auto& v : sym) v = t.Lookup(static_cast<std::uint32_t>(rng.Below(entropy::kTotalFrequency)));
    sym.front() = t.min_symbol;
    sym.back() = t.max_symbol();
    ok = ok && entropy::RangeDecode(entropy::RangeEncode(sym, t), t, sym.size()) == sym;
  }
  return Report("range coder round-trip", ok, "10 x 1e5 symbols");
}

bool GradSuite(std::uint64_t seed) {
  nn::Rng rng(DeriveSeed(seed, {11}));
  auto probe = [](nn::Var<double> y, const nn::Tensor<double>& r) {
    return nn::Sum(nn::Mul(y, y.tape->Constant(r)));
  };
  bool ok = true;
  struct Case {
    const char* name;
    nn::ScalarFn fn;
    std::vector<nn::Tensor<double>> in;
  };
  const auto r_conv = Gauss({1, 4, 4, 3}, rng);
  const auto r_dec = Gauss({1, 8, 8, 3}, rng);
  const auto r_seq = Gauss({1, 3, 4}, rng);
  std::vector<Case> cases;
  cases.push_back({"conv2d 5x5/2",
                   [&](nn::Tape<double>&, std::span<const nn::Var<double>> v) {
                     return probe(nn::Conv2d(v[0], v[1], v[2], {5, 2, 2, 0}), r_conv);
                   },
                   {Gauss({1, 8, 8, 2}, rng), Gauss({3, 5, 5, 2}, rng), Gauss({3}, rng)}});
  cases.push_back({"deconv2d 5x5/2",
                   [&](nn::Tape<double>&, std::span<const nn::Var<double>> v) {
                     return probe(nn::Deconv2d(v[0], v[1], v[2], {5, 2, 2, 1}), r_dec);
                   },
                   {Gauss({1, 4, 4, 2}, rng), Gauss({2, 5, 5, 3}, rng), Gauss({3}, rng)}});
  cases.push_back({"layer norm",
                   [&](nn::Tape<double>&, std::span<const nn::Var<double>> v) {
                     return probe(nn::LayerNorm(v[0], v[1], v[2], 1e-6), r_seq);
                   },
                   {Gauss({1, 3, 4}, rng), Gauss({4}, rng), Gauss({4}, rng)}});
  cases.push_back({"self-attention",
                   [&](nn::Tape<double>&, std::span<const nn::Var<double>> v) {
                     auto qkv = nn::Linear(v[0], v[1], v[2]);
                     return probe(nn::Linear(nn::SelfAttention(qkv, 2), v[3], v[4]), r_seq);
                   },
                   {Gauss({1, 3, 4}, rng), Gauss({12, 4}, rng), Gauss({12}, rng),
                    Gauss({4, 4}, rng), Gauss({4}, rng)}});
  cases.push_back({"feed-forward",
                   [&](nn::Tape<double>&, std::span<const nn::Var<double>> v) {
                     auto h = nn::Gelu(nn::Linear(v[0], v[1], v[2]));
                     return probe(nn::Linear(h, v[3], v[4]), r_seq);
                   },
                   {Gauss({1, 3, 4}, rng), Gauss({16, 4}, rng), Gauss({16}, rng),
                    Gauss({4, 16}, rng), Gauss({4}, rng)}});
  for (const auto& cs : cases) {
    const auto rep = nn::GradientCheck(cs.fn, cs.in, 1e-5);
    ok = Report(std::string("gradient ") + cs.name, rep.passed, rep.Summary()) && ok;
  }
  return ok;
}

int Selftest(const Common& c) {
  bool ok = CoderSuite(c.seed);
  ok = GradSuite(c.seed) && ok;

  // Small end-to-end run; every artifact is written under --out.
  const ModelConfig cfg = c.Model();
  const fs::path out = c.out.empty() ? fs::path("selftest") : fs::path(c.out);
  fs::create_directories(out / "streams");
  const eval::Dataset train_set =
      eval::SynthesizeDataset(64, cfg.input_h, cfg.input_w, DeriveSeed(c.seed, {20}));
  const eval::Dataset val_set =
      eval::SynthesizeDataset(20, cfg.input_h, cfg.input_w, DeriveSeed(c.seed, {21}));
  Model<float> m(cfg);
  m.Init(DeriveSeed(c.seed, {0}));
  train::TrainConfig t1 = train::TrainConfig::Stage1Defaults();
  t1.epochs = 2;
  t1.batch_size = 16;
  t1.warmup_epochs = 0.5;
  t1.seed = c.seed;
  train::TrainStage1(m, train_set, t1);
  train::SaveCheckpoint((out / "stage1.ckpt").string(), m, Stage::kPretrain, 2);

  std::vector<eval::MetricRecord> records;
  for (double alpha : {0.1, 0.3}) {
    Model<float> m2(cfg);
    train::LoadCheckpoint((out / "stage1.ckpt").string(), m2);
    train::TrainConfig t2 = train::TrainConfig::Stage2Defaults();
    t2.epochs = 1;
    t2.batch_size = 16;
    t2.alpha = alpha;
    t2.beta = alpha / 100.0;
    t2.seed = c.seed;
    train::TrainStage2(m2, train_set, t2);
    const std::string tag = Fmt("a%.2f", alpha);
    train::SaveCheckpoint((out / ("stage2_" + tag + ".ckpt")).string(), m2, Stage::kFull, 1);
    for (std::size_t i = 0; i < 4; ++i) {
      const std::size_t idx[] = {i};
      const auto bytes = CompressImage(m2, val_set.Batch(idx));
      train::WriteFileBytes((out / "streams" / (tag + "_" + std::to_string(i) + ".ecat")).string(),
                            bytes);
      const entropy::LatentPack back = ReadStream(m2, bytes);
      ok = (back == EncodeImages(m2, val_set.Batch(idx))[0]) && ok;
    }
    eval::MetricRecord r = eval::Evaluate(m2, val_set);
    r.alpha = t2.alpha;
    r.beta = t2.beta;
    r.seed = c.seed;
    records.push_back(r);
  }
  eval::EmitCurves(records, out.string());
  ok = Report("pipeline", ok, "artifacts in " + out.string()) && ok;
  if (!ok) throw CheckFailed("selftest failed");
  return 0;
}

int Run(int argc, char** argv) {
  CLI::App app{"ecat: joint compression and classification"};
  app.require_subcommand(1);
  Common c;

  std::size_t count = 2000;
  std::string split = "train";
  auto* synth = app.add_subcommand("synth", "write the synthetic 10-class set");
  AddCommon(synth, c, false);
  synth->add_option("--out", c.out, "output directory")->required();
  synth->add_option("--count", count, "number of images");
  synth->add_option("--split", split, "split name (subdirectory)");

  std::string data, init, model, input, reference, records, audit;
  int epochs = 0, top = 5;
  double lr = 0.0;
  std::vector<std::string> inputs;

  auto* t1 = app.add_subcommand("train-stage1", "pretrain without quantization");
  AddCommon(t1, c, true);
  t1->add_option("--data", data, "training manifest")->required();
  t1->add_option("--out", c.out, "output directory")->required();
  t1->add_option("--epochs", epochs);
  t1->add_option("--lr", lr);

  auto* t2 = app.add_subcommand("train-stage2", "joint training with the rate term");
  AddCommon(t2, c, true);
  t2->add_option("--init", init, "stage-1 checkpoint")->required();
  t2->add_option("--data", data, "training manifest")->required();
  t2->add_option("--out", c.out, "output directory")->required();
  t2->add_option("--epochs", epochs);
  t2->add_option("--lr", lr);

  auto* comp = app.add_subcommand("compress", "image.ppm -> image.ecat");
  AddCommon(comp, c, false);
  comp->add_option("--model", model, "checkpoint")->required();
  comp->add_option("input", input, "P6 PPM image")->required();
  comp->add_option("--out", c.out, "output stream path");

  auto* decomp = app.add_subcommand("decompress", "image.ecat -> image.ppm");
  AddCommon(decomp, c, false);
  decomp->add_option("--model", model, "checkpoint")->required();
  decomp->add_option("input", input, "stream")->required();
  decomp->add_option("--out", c.out, "output image path");
  decomp->add_option("--reference", reference, "original image for PSNR");

  auto* cls = app.add_subcommand("classify", "top classes from a stream");
  AddCommon(cls, c, false);
  cls->add_option("--model", model, "checkpoint")->required();
  cls->add_option("input", input, "stream (.ecat)")->required();
  cls->add_option("--top", top, "number of classes to print")->check(CLI::PositiveNumber);
  cls->add_option("--audit", audit, "write the list of files read to this path");

  auto* ev = app.add_subcommand("evaluate", "bpp, PSNR and top-1 over a manifest");
  AddCommon(ev, c, true);
  ev->add_option("--model", model, "checkpoint")->required();
  ev->add_option("--data", data, "manifest")->required();
  ev->add_option("--records", records, "append the record to this CSV");

  auto* ab = app.add_subcommand("ablate", "PSNR with transformer features removed");
  AddCommon(ab, c, false);
  ab->add_option("--model", model, "checkpoint")->required();
  ab->add_option("--data", data, "manifest")->required();

  auto* cur = app.add_subcommand("curves", "rate-distortion and rate-accuracy CSVs");
  AddCommon(cur, c, false);
  cur->add_option("records", inputs, "record CSVs from evaluate")->required();
  cur->add_option("--out", c.out, "output directory")->required();

  auto* st = app.add_subcommand("selftest", "coder, gradient and pipeline checks");
  AddCommon(st, c, false);
  st->add_option("--out", c.out, "artifact directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (!c.config.empty()) {
    c.kv = LoadKeyValueFile(c.config);
    static const std::set<std::string> known = {
        "input_h", "input_w", "channels_n", "channels_m", "embed_c", "depth_l", "heads",
        "num_classes", "ffn_ratio", "epochs", "batch_size", "lr", "warmup_epochs",
        "weight_decay", "alpha", "beta", "seed", "augment", "crop_pad", "clip_norm"};
    for (const auto& [k, v] : c.kv) {
      if (!known.count(k)) throw ConfigError(c.config + ": unknown key '" + k + "'");
    }
  }

  if (synth->parsed()) return Synth(c, count, split);
  if (t1->parsed()) return TrainStage1(c, data, epochs, lr);
  if (t2->parsed()) return TrainStage2(c, init, data, epochs, lr);
  if (comp->parsed()) return Compress(c, model, input);
  if (decomp->parsed()) return Decompress(c, model, input, reference);
  if (cls->parsed()) return Classify(c, model, input, top, audit);
  if (ev->parsed()) return Evaluate(c, model, data, records);
  if (ab->parsed()) return Ablate(c, model, data);
  if (cur->parsed()) return Curves(c, inputs);
  if (st->parsed()) return Selftest(c);
  return 1;
}

}  // namespace
}  // namespace ecat

int main(int argc, char** argv) {
  try {
    return ecat::Run(argc, argv);
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "ecat: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ecat: %s\n", e.what());
    return 1;
  }
}
