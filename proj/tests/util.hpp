#pragma once

// Shared test scaffolding: a per-process scratch directory, a subprocess
// runner for the CLI binary, and small corpus builders.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "segtopic/corpus.hpp"

namespace testutil {

inline std::filesystem::path scratch_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("segtopic_tests_" + std::to_string(static_cast<long>(::getpid())));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

inline std::string scratch_file(const std::string& name) {
  return (scratch_dir() / name).string();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

// Runs the CLI binary named by the SEGTOPIC_BIN compile definition with the
// given argument string; captures combined output.
inline CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string log = scratch_file("cli_out_" + std::to_string(counter++) + ".log");
  const std::string cmd = std::string(SEGTOPIC_BIN) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  r.output = read_text(log);
  return r;
}

inline segtopic::Segment make_segment(const std::string& id,
                                      std::vector<std::string> tokens,
                                      std::set<std::size_t> labels,
                                      double music = 0.5) {
  segtopic::Segment s;
  s.segment_id = id;
  s.tokens = std::move(tokens);
  s.labels = std::move(labels);
  s.music_posterior = music;
  return s;
}

inline segtopic::Document make_document(const std::string& id,
                                        std::vector<segtopic::Segment> segments) {
  segtopic::Document d;
  d.doc_id = id;
  d.segments = std::move(segments);
  return d;
}

// Small generated corpus with distinguishable topics; handy wherever a test
// needs realistic multi-document data.
inline std::vector<segtopic::Document> tiny_corpus(std::size_t docs, std::uint64_t seed) {
  segtopic::CorpusSpec spec;
  spec.num_documents = docs;
  spec.segments_per_doc_min = 2;
  spec.segments_per_doc_max = 5;
  spec.topic_stay_probability = 0.7;
  spec.vocab_size = 60;
  spec.tokens_per_segment_min = 6;
  spec.tokens_per_segment_max = 12;
  spec.topic_word_concentration = 6.0;
  spec.label_noise = 0.1;
  spec.ood_fraction = 0.2;
  spec.music_posterior_ood_shift = 0.2;
  spec.seed = seed;
  return segtopic::generate_corpus(spec);
}

}  // namespace testutil
