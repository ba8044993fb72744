#pragma once

#include "prefforge/data/records.hpp"
#include "prefforge/dpo/objective.hpp"

#include <string_view>
#include <vector>

namespace prefforge::dpo {

std::vector<std::string> split_whitespace(std::string_view text);

// Most frequent whitespace tokens of the triples (ties broken by symbol),
// followed by <unk> and <eos>. `max_size` counts the two reserved symbols.
Vocab build_text_vocab(const std::vector<data::DpoTriple>& triples, std::size_t max_size = 256);

// Out-of-vocab words map to <unk>.
TokenSeq encode(const Vocab& vocab, std::string_view text);

struct TextDataset {
    Vocab vocab;
    std::vector<PreferenceInstance> instances;
    // Triples whose chosen and rejected responses encode identically.
    std::size_t dropped = 0;
};

// Responses are terminated with <eos>.
TextDataset build_text_dataset(const std::vector<data::DpoTriple>& triples, std::size_t max_vocab = 256);

}  // namespace prefforge::dpo
