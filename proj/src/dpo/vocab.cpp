#include "prefforge/dpo/vocab.hpp"

#include <stdexcept>

namespace prefforge::dpo {

Vocab::Vocab(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.size() < 2) throw std::invalid_argument("vocab needs at least two symbols");
    for (Token i = 0; i < symbols_.size(); ++i) {
        if (symbols_[i] == kBos) throw std::invalid_argument("<bos> is implicit and cannot be a symbol");
        if (!index_.emplace(symbols_[i], i).second) {
            throw std::invalid_argument("duplicate vocab symbol '" + symbols_[i] + "'");
        }
    }
}

Vocab Vocab::numbered(std::size_t n) {
    std::vector<std::string> symbols;
    for (std::size_t i = 0; i < n; ++i) symbols.push_back("t" + std::to_string(i));
    return Vocab(std::move(symbols));
}

const std::string& Vocab::symbol(Token token) const {
    if (token >= symbols_.size()) throw std::domain_error("token index " + std::to_string(token) + " out of range");
    return symbols_[token];
}

bool Vocab::contains(std::string_view symbol) const { return index_.contains(std::string(symbol)); }

Token Vocab::index(std::string_view symbol) const {
    auto it = index_.find(std::string(symbol));
    if (it == index_.end()) throw std::domain_error("symbol '" + std::string(symbol) + "' not in vocab");
    return it->second;
}

void check_tokens(const TokenSeq& tokens, std::size_t v, std::string_view what) {
    for (Token t : tokens) {
        if (t >= v) {
            throw std::domain_error(std::string(what) + ": token " + std::to_string(t) + " outside vocab of size " +
                                    std::to_string(v));
        }
    }
}

}  // namespace prefforge::dpo
