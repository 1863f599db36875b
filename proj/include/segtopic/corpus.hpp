#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "segtopic/labels.hpp"

namespace segtopic {

// One classification unit: a bag of tokens, a music posterior in (0,1),
// and a set of topic label ids. Out-of-domain is exclusive: a segment
// labeled out-of-domain carries no in-domain labels.
struct Segment {
  std::string segment_id;
  std::vector<std::string> tokens;
  double music_posterior = 0.5;
  std::set<std::size_t> labels;

  bool is_ood() const { return labels.count(kOutOfDomainId) > 0; }
  bool has_in_domain_label() const {
    for (std::size_t id : labels) {
      if (is_in_domain(id)) return true;
    }
    return false;
  }
};

// Ordered segment sequence. Index i (1-based in the scoring/attention
// math) is the segment's position; order is preserved exactly as ingested.
struct Document {
  std::string doc_id;
  bool annotated = true;  // false permits empty label sets (inference-only data)
  std::vector<Segment> segments;
};

// Parameters of the seeded synthetic corpus generator.
struct CorpusSpec {
  std::size_t num_documents = 0;
  std::size_t segments_per_doc_min = 1;
  std::size_t segments_per_doc_max = 1;
  double topic_stay_probability = 0.5;  // Markov self-transition of latent topic
  std::size_t vocab_size = 12;
  std::size_t tokens_per_segment_min = 1;
  std::size_t tokens_per_segment_max = 1;
  double topic_word_concentration = 1.0;  // peakedness of per-topic word dists
  double label_noise = 0.0;
  double ood_fraction = 0.0;
  double music_posterior_ood_shift = 0.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws UsageError
};

// Reads a generator spec from a JSON file (strict keys, defaults per the
// struct). Throws UsageError on malformed or invalid specs.
CorpusSpec load_corpus_spec(const std::string& path);

// Reads a line-delimited corpus file (one JSON document object per line;
// see FORMATS.md) and validates every invariant: unique ids, known label
// names, music posterior strictly inside (0,1), out-of-domain exclusivity,
// non-empty labels on annotated documents. Errors carry the line number.
std::vector<Document> load_corpus(const std::string& path);

// Serializer counterpart of load_corpus; load(write(C)) == C.
void write_corpus(const std::vector<Document>& corpus, const std::string& path);

// Deterministic synthetic corpus. Each document draws a latent in-domain
// topic chain (self-transition topic_stay_probability, otherwise uniform
// over the other in-domain topics); a segment flips to out-of-domain
// independently with probability ood_fraction. Tokens come from the active
// topic's word distribution; gold labels equal the latent topic, flipped or
// augmented with probability label_noise; out-of-domain segments draw their
// music posterior with the mean shifted by music_posterior_ood_shift.
std::vector<Document> generate_corpus(const CorpusSpec& spec);

// Partitions document ids into k folds whose sizes differ by at most one;
// deterministic given seed. Throws UsageError if k < 2 or k exceeds the
// number of documents.
std::vector<std::set<std::string>> split_folds(const std::vector<Document>& corpus,
                                               std::size_t k, std::uint64_t seed);

// Segment-granularity variant: partitions segment ids (for the
// cross-validation runner's granularity flag).
std::vector<std::set<std::string>> split_folds_by_segment(
    const std::vector<Document>& corpus, std::size_t k, std::uint64_t seed);

std::size_t count_segments(const std::vector<Document>& corpus);

}  // namespace segtopic
