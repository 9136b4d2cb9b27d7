#include "curator/bpe.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include "curator/unicode.hpp"

namespace curator {

namespace {

constexpr uint64_t pair_key(uint32_t left, uint32_t right) {
    return (uint64_t(left) << 32) | right;
}

bool is_space_byte(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Maximal runs of whitespace or non-whitespace; merges never cross them.
template <typename Fn>
void for_each_run(std::string_view text, Fn&& fn) {
    size_t i = 0;
    while (i < text.size()) {
        bool ws = is_space_byte(text[i]);
        size_t begin = i;
        while (i < text.size() && is_space_byte(text[i]) == ws) ++i;
        fn(text.substr(begin, i - begin));
    }
}

struct HeapEntry {
    int64_t count;
    uint32_t left;
    uint32_t right;
};

// Max count on top; equal counts resolve to the lowest (left, right) pair.
struct HeapLess {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        if (a.count != b.count) return a.count < b.count;
        if (a.left != b.left) return a.left > b.left;
        return a.right > b.right;
    }
};

struct TrainerNode {
    int32_t sym;
    int64_t prev;
    int64_t next;
    uint32_t seq;
};

class BpeTrainer {
public:
    BpeTrainer(const std::vector<std::string>& corpus, const BpeTrainOptions& opts)
        : opts_(opts) {
        collect_sequences(corpus);
        build_nodes();
        count_initial_pairs();
    }

    std::vector<BpeMerge> run(size_t max_merges) {
        std::vector<BpeMerge> merges;
        merges.reserve(max_merges);
        while (merges.size() < max_merges && !heap_.empty()) {
            HeapEntry top = heap_.top();
            heap_.pop();
            const uint64_t key = pair_key(top.left, top.right);
            auto it = counts_.find(key);
            int64_t current = it == counts_.end() ? 0 : it->second;
            if (current != top.count) {
                if (current >= 2) heap_.push({current, top.left, top.right});
                continue;
            }
            if (current < 2) break;

            const uint32_t new_id = 256 + uint32_t(merges.size());
            merges.push_back({top.left, top.right});
            apply_merge(top.left, top.right, new_id, key);
        }
        return merges;
    }

private:
    void collect_sequences(const std::vector<std::string>& corpus) {
        std::unordered_map<std::string_view, uint32_t> index;
        for (const auto& doc : corpus) {
            auto add = [&](std::string_view chunk) {
                if (chunk.empty()) return;
                auto [it, inserted] = index.emplace(chunk, uint32_t(sequences_.size()));
                if (inserted) {
                    sequences_.push_back(chunk);
                    weights_.push_back(1);
                } else {
                    ++weights_[it->second];
                }
            };
            if (opts_.pre_split)
                for_each_run(doc, add);
            else
                add(doc);
        }
    }

    void build_nodes() {
        size_t total = 0;
        for (auto s : sequences_) total += s.size();
        nodes_.reserve(total);
        for (uint32_t s = 0; s < sequences_.size(); ++s) {
            std::string_view seq = sequences_[s];
            int64_t base = int64_t(nodes_.size());
            for (size_t i = 0; i < seq.size(); ++i) {
                nodes_.push_back({int32_t(uint8_t(seq[i])),
                                  i == 0 ? int64_t(-1) : base + int64_t(i) - 1,
                                  i + 1 == seq.size() ? int64_t(-1) : base + int64_t(i) + 1,
                                  s});
            }
        }
    }

    void count_initial_pairs() {
        for (int64_t n = 0; n + 1 < int64_t(nodes_.size()); ++n) {
            if (nodes_[n].next != n + 1) continue;  // sequence boundary
            uint64_t key = pair_key(uint32_t(nodes_[n].sym), uint32_t(nodes_[n + 1].sym));
            counts_[key] += weights_[nodes_[n].seq];
            positions_[key].push_back(n);
        }
        for (const auto& [key, count] : counts_) {
            if (count >= 2)
                heap_.push({count, uint32_t(key >> 32), uint32_t(key & 0xFFFFFFFF)});
        }
    }

    void decrement(uint32_t left, uint32_t right, int64_t weight) {
        auto it = counts_.find(pair_key(left, right));
        assert(it != counts_.end() && it->second >= weight);
        it->second -= weight;
    }

    void increment(uint32_t left, uint32_t right, int64_t weight, int64_t node) {
        uint64_t key = pair_key(left, right);
        int64_t after = (counts_[key] += weight);
        positions_[key].push_back(node);
        if (after >= 2) heap_.push({after, left, right});
    }

    void apply_merge(uint32_t left, uint32_t right, uint32_t new_id, uint64_t key) {
        auto pos_it = positions_.find(key);
        if (pos_it == positions_.end()) return;
        std::vector<int64_t> occurrences = std::move(pos_it->second);
        positions_.erase(pos_it);

        for (int64_t n : occurrences) {
            if (nodes_[n].sym != int32_t(left)) continue;
            int64_t m = nodes_[n].next;
            if (m < 0 || nodes_[m].sym != int32_t(right)) continue;

            const int64_t w = weights_[nodes_[n].seq];
            const int64_t p = nodes_[n].prev;
            const int64_t q = nodes_[m].next;

            decrement(left, right, w);
            if (p >= 0) decrement(uint32_t(nodes_[p].sym), left, w);
            if (q >= 0) decrement(right, uint32_t(nodes_[q].sym), w);

            nodes_[n].sym = int32_t(new_id);
            nodes_[n].next = q;
            if (q >= 0) nodes_[q].prev = n;
            nodes_[m].sym = -1;
            nodes_[m].prev = nodes_[m].next = -1;

            if (p >= 0) increment(uint32_t(nodes_[p].sym), new_id, w, p);
            if (q >= 0) increment(new_id, uint32_t(nodes_[q].sym), w, n);
        }
        counts_.erase(key);
    }

    BpeTrainOptions opts_;
    std::vector<std::string_view> sequences_;
    std::vector<int64_t> weights_;
    std::vector<TrainerNode> nodes_;
    std::unordered_map<uint64_t, int64_t> counts_;
    std::unordered_map<uint64_t, std::vector<int64_t>> positions_;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapLess> heap_;
};

}  // namespace

BpeModel::BpeModel(std::vector<BpeMerge> merges, std::vector<std::string> special_tokens,
                   bool pre_split)
    : merges_(std::move(merges)),
      special_tokens_(std::move(special_tokens)),
      pre_split_(pre_split) {
    build_tables();
}

void BpeModel::build_tables() {
    token_bytes_.clear();
    token_bytes_.reserve(vocab_size());
    for (uint32_t b = 0; b < kByteVocab; ++b) token_bytes_.emplace_back(1, char(b));
    merge_rank_.clear();
    merge_rank_.reserve(merges_.size() * 2);
    for (uint32_t r = 0; r < merges_.size(); ++r) {
        const BpeMerge& merge = merges_[r];
        if (merge.left >= kByteVocab + r || merge.right >= kByteVocab + r)
            throw std::invalid_argument("merge " + std::to_string(r) +
                                        " references an id defined later");
        token_bytes_.push_back(token_bytes_[merge.left] + token_bytes_[merge.right]);
        merge_rank_.emplace(pair_key(merge.left, merge.right), r);
    }
    for (const auto& name : special_tokens_) token_bytes_.push_back(name);
}

std::optional<uint32_t> BpeModel::special_id(std::string_view name) const {
    for (uint32_t i = 0; i < special_tokens_.size(); ++i) {
        if (special_tokens_[i] == name)
            return kByteVocab + uint32_t(merges_.size()) + i;
    }
    return std::nullopt;
}

uint32_t BpeModel::pad_id_or_throw() const {
    auto id = special_id("<pad>");
    if (!id) throw std::runtime_error("tokenizer model has no <pad> special token");
    return *id;
}

namespace {

// Rank-ordered merge application over a doubly linked symbol list. Equal
// ranks resolve leftmost-first because node indices are byte positions.
void apply_merges(std::span<uint32_t> syms, std::vector<int32_t>& prev,
                  std::vector<int32_t>& next,
                  const std::unordered_map<uint64_t, uint32_t>& ranks,
                  std::vector<uint32_t>& out) {
    const int32_t n = int32_t(syms.size());
    using QEntry = std::pair<uint32_t, int32_t>;  // (rank, left node)
    std::priority_queue<QEntry, std::vector<QEntry>, std::greater<>> queue;

    auto push_if_ranked = [&](int32_t i) {
        int32_t j = next[i];
        if (j < 0) return;
        auto it = ranks.find(pair_key(syms[i], syms[j]));
        if (it != ranks.end()) queue.emplace(it->second, i);
    };

    for (int32_t i = 0; i + 1 < n; ++i) push_if_ranked(i);

    while (!queue.empty()) {
        auto [rank, i] = queue.top();
        queue.pop();
        if (prev[i] == -2) continue;  // dead node
        int32_t j = next[i];
        if (j < 0) continue;
        auto it = ranks.find(pair_key(syms[i], syms[j]));
        if (it == ranks.end() || it->second != rank) continue;  // stale entry

        syms[i] = 256 + rank;
        int32_t q = next[j];
        next[i] = q;
        if (q >= 0) prev[q] = i;
        prev[j] = -2;
        next[j] = -2;

        if (prev[i] >= 0) push_if_ranked(prev[i]);
        push_if_ranked(i);
    }

    for (int32_t i = 0; i >= 0 && i < n; i = next[i]) out.push_back(syms[i]);
}

}  // namespace

void BpeModel::encode_into(std::string_view text, std::vector<uint32_t>& out) const {
    auto encode_chunk = [&](std::string_view chunk) {
        if (chunk.empty()) return;
        if (chunk.size() == 1 || merge_rank_.empty()) {
            for (unsigned char c : chunk)
                out.push_back(c);
            return;
        }
        std::vector<uint32_t> syms(chunk.size());
        std::vector<int32_t> prev(chunk.size());
        std::vector<int32_t> next(chunk.size());
        for (size_t i = 0; i < chunk.size(); ++i) {
            syms[i] = uint8_t(chunk[i]);
            prev[i] = int32_t(i) - 1;
            next[i] = i + 1 < chunk.size() ? int32_t(i) + 1 : -1;
        }
        apply_merges(syms, prev, next, merge_rank_, out);
    };

    if (pre_split_)
        for_each_run(text, encode_chunk);
    else
        encode_chunk(text);
}

std::vector<uint32_t> BpeModel::encode(std::string_view text) const {
    std::vector<uint32_t> out;
    out.reserve(text.size() / 2 + 1);
    encode_into(text, out);
    return out;
}

std::string BpeModel::decode(std::span<const uint32_t> ids) const {
    std::string out;
    for (uint32_t id : ids) {
        if (id >= token_bytes_.size()) throw UnknownTokenError(id);
        out += token_bytes_[id];
    }
    return out;
}

const std::string& BpeModel::token_string(uint32_t id) const {
    if (id >= token_bytes_.size()) throw UnknownTokenError(id);
    return token_bytes_[id];
}

BpeModel BpeModel::truncated(size_t merge_count) const {
    if (merge_count > merges_.size())
        throw std::invalid_argument("cannot truncate to more merges than exist");
    std::vector<BpeMerge> prefix(merges_.begin(), merges_.begin() + merge_count);
    return BpeModel(std::move(prefix), special_tokens_, pre_split_);
}

void BpeModel::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "bytebpe 1 " << merges_.size() << ' ' << special_tokens_.size() << ' '
       << (pre_split_ ? 1 : 0) << '\n';
    for (const auto& merge : merges_) os << merge.left << ' ' << merge.right << '\n';
    for (const auto& name : special_tokens_) {
        if (name.empty() || name.find('\n') != std::string::npos)
            throw std::runtime_error("special token name not serializable: '" + name + "'");
        os << name << '\n';
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

BpeModel BpeModel::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("empty model file: " + path);
    std::istringstream hs(header);
    std::string magic;
    int version = 0;
    size_t merge_count = 0, special_count = 0;
    int pre_split_flag = 0;
    hs >> magic >> version >> merge_count >> special_count >> pre_split_flag;
    if (magic != "bytebpe" || version != 1)
        throw std::runtime_error("not a bytebpe v1 model file: " + path);

    std::vector<BpeMerge> merges;
    merges.reserve(merge_count);
    for (size_t i = 0; i < merge_count; ++i) {
        BpeMerge merge;
        if (!(is >> merge.left >> merge.right))
            throw std::runtime_error("truncated merge list in " + path);
        merges.push_back(merge);
    }
    std::string rest;
    std::getline(is, rest);  // consume end of the last merge line

    std::vector<std::string> specials;
    specials.reserve(special_count);
    for (size_t i = 0; i < special_count; ++i) {
        std::string name;
        if (!std::getline(is, name))
            throw std::runtime_error("truncated special token list in " + path);
        specials.push_back(name);
    }
    return BpeModel(std::move(merges), std::move(specials), pre_split_flag != 0);
}

BpeModel bpe_train(const std::vector<std::string>& corpus, const BpeTrainOptions& opts) {
    if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
    if (opts.target_vocab < BpeModel::kByteVocab + opts.special_tokens.size())
        throw std::invalid_argument("target_vocab must be at least 256 + special tokens");

    const size_t max_merges =
        opts.target_vocab - BpeModel::kByteVocab - opts.special_tokens.size();
    BpeTrainer trainer(corpus, opts);
    return BpeModel(trainer.run(max_merges), opts.special_tokens, opts.pre_split);
}

BptReport bpt_eval(const BpeModel& model,
                   const std::map<std::string, std::vector<std::string>>& eval_sets) {
    BptReport report;
    std::vector<uint32_t> ids;
    for (const auto& [domain, docs] : eval_sets) {
        DomainBpt acc;
        for (const auto& text : docs) {
            ids.clear();
            model.encode_into(text, ids);
            acc.bytes += text.size();
            acc.tokens += ids.size();
        }
        if (acc.bytes == 0) {
            report.warnings.push_back("domain '" + domain + "' is empty; excluded");
            continue;
        }
        report.per_domain[domain] = acc;
        report.overall.bytes += acc.bytes;
        report.overall.tokens += acc.tokens;
    }
    return report;
}

std::vector<SweepRow> mixture_sweep(
    const std::map<std::string, std::vector<std::string>>& sources,
    const std::vector<std::map<std::string, double>>& ratios, size_t target_vocab,
    uint64_t byte_budget, const std::map<std::string, std::vector<std::string>>& eval_sets,
    const BpeTrainOptions& base_opts) {
    std::vector<SweepRow> rows;
    for (const auto& ratio : ratios) {
        double total_share = 0.0;
        for (const auto& [name, share] : ratio) total_share += share;
        if (std::abs(total_share - 1.0) > 1e-9)
            throw std::invalid_argument("mixture ratio shares must sum to 1");

        std::vector<std::string> sample;
        std::string label;
        for (const auto& [name, share] : ratio) {
            if (!label.empty()) label += ',';
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%s=%.3f", name.c_str(), share);
            label += buf;
            if (share <= 0.0) continue;

            auto src = sources.find(name);
            if (src == sources.end())
                throw std::invalid_argument("unknown mixture source '" + name + "'");
            const uint64_t want = uint64_t(std::llround(share * double(byte_budget)));
            uint64_t got = 0;
            for (const auto& doc : src->second) {
                if (got >= want) break;
                sample.push_back(doc);
                got += doc.size();
            }
            if (got < want)
                throw std::runtime_error("source '" + name + "' cannot supply " +
                                         std::to_string(want) + " bytes (has " +
                                         std::to_string(got) + ")");
        }

        BpeTrainOptions opts = base_opts;
        opts.target_vocab = target_vocab;
        BpeModel model = bpe_train(sample, opts);
        BptReport report = bpt_eval(model, eval_sets);
        for (const auto& [domain, acc] : report.per_domain)
            rows.push_back({label, domain, acc.bytes, acc.tokens, acc.bpt()});
        rows.push_back(
            {label, "overall", report.overall.bytes, report.overall.tokens,
             report.overall.bpt()});
    }
    return rows;
}

VocabAuditResult vocab_audit(const BpeModel& model,
                             const std::vector<std::string>& harmful_lexicon) {
    VocabAuditResult audit;
    for (uint32_t id = 0; id < model.vocab_size(); ++id) {
        const std::string& token = model.token_string(id);
        if (utf8_valid(token) && contains_hangul(token))
            ++audit.kr_tokens;
        else
            ++audit.other_tokens;
        for (const auto& entry : harmful_lexicon) {
            if (!entry.empty() && token.find(entry) != std::string::npos)
                audit.harmful_hits.push_back({id, token, entry});
        }
    }
    uint64_t total = audit.kr_tokens + audit.other_tokens;
    audit.kr_share = total ? double(audit.kr_tokens) / double(total) : 0.0;
    return audit;
}

}  // namespace curator
