#include "hwqa/porter.hpp"

#include <array>
#include <utility>

namespace hwqa::porter {

namespace {

class Stemmer {
public:
    explicit Stemmer(std::string_view word) : b_(word) {}

    std::string run() && {
        if (b_.size() <= 2) {
            return std::move(b_);
        }
        step1a();
        step1b();
        step1c();
        step2();
        step3();
        step4();
        step5a();
        step5b();
        return std::move(b_);
    }

private:
    std::string b_;

    // Consonant test at index i of the first `len` characters.
    bool cons(std::size_t i) const {
        switch (b_[i]) {
            case 'a': case 'e': case 'i': case 'o': case 'u':
                return false;
            case 'y':
                return i == 0 || !cons(i - 1);
            default:
                return true;
        }
    }

    // Number of VC sequences in b_[0, len).
    int measure(std::size_t len) const {
        int m = 0;
        std::size_t i = 0;
        while (i < len && cons(i)) ++i;
        while (i < len) {
            while (i < len && !cons(i)) ++i;
            if (i >= len) break;
            while (i < len && cons(i)) ++i;
            ++m;
        }
        return m;
    }

    bool has_vowel(std::size_t len) const {
        for (std::size_t i = 0; i < len; ++i) {
            if (!cons(i)) return true;
        }
        return false;
    }

    bool double_consonant(std::size_t len) const {
        return len >= 2 && b_[len - 1] == b_[len - 2] && cons(len - 1);
    }

    // *o: stem ends consonant-vowel-consonant, last not w, x or y.
    bool cvc(std::size_t len) const {
        if (len < 3 || !cons(len - 1) || cons(len - 2) || !cons(len - 3)) return false;
        const char c = b_[len - 1];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends(std::string_view suffix) const {
        return b_.size() >= suffix.size() &&
               std::string_view(b_).substr(b_.size() - suffix.size()) == suffix;
    }

    std::size_t stem_len(std::string_view suffix) const { return b_.size() - suffix.size(); }

    void replace_suffix(std::string_view suffix, std::string_view with) {
        b_.resize(stem_len(suffix));
        b_.append(with);
    }

    struct Rule {
        std::string_view suffix;
        std::string_view replacement;
    };

    // First matching suffix wins; if its stem has measure <= min_m, stop.
    template <std::size_t N>
    void apply_rules(const std::array<Rule, N>& rules, int min_m) {
        for (const auto& r : rules) {
            if (ends(r.suffix)) {
                if (measure(stem_len(r.suffix)) > min_m) {
                    replace_suffix(r.suffix, r.replacement);
                }
                return;
            }
        }
    }

    void step1a() {
        if (ends("sses")) {
            replace_suffix("sses", "ss");
        } else if (ends("ies")) {
            replace_suffix("ies", "i");
        } else if (ends("ss")) {
            // unchanged
        } else if (ends("s")) {
            b_.pop_back();
        }
    }

    void step1b() {
        if (ends("eed")) {
            if (measure(stem_len("eed")) > 0) {
                b_.pop_back();
            }
            return;
        }
        std::string_view removed;
        if (ends("ed") && has_vowel(stem_len("ed"))) {
            removed = "ed";
        } else if (ends("ing") && has_vowel(stem_len("ing"))) {
            removed = "ing";
        } else {
            return;
        }
        b_.resize(stem_len(removed));

        if (ends("at") || ends("bl") || ends("iz")) {
            b_.push_back('e');
        } else if (double_consonant(b_.size())) {
            const char c = b_.back();
            if (c != 'l' && c != 's' && c != 'z') {
                b_.pop_back();
            }
        } else if (measure(b_.size()) == 1 && cvc(b_.size())) {
            b_.push_back('e');
        }
    }

    void step1c() {
        if (ends("y") && has_vowel(b_.size() - 1)) {
            b_.back() = 'i';
        }
    }

    void step2() {
        static constexpr std::array<Rule, 20> rules{{
            {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
            {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},
            {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
            {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
            {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
        }};
        apply_rules(rules, 0);
    }

    void step3() {
        static constexpr std::array<Rule, 7> rules{{
            {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
            {"ical", "ic"},  {"ful", ""},   {"ness", ""},
        }};
        apply_rules(rules, 0);
    }

    void step4() {
        static constexpr std::array<std::string_view, 19> suffixes{
            "al",   "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
            "ent",  "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
        };
        for (std::string_view s : suffixes) {
            if (!ends(s)) continue;
            const std::size_t len = stem_len(s);
            if (measure(len) <= 1) return;
            if (s == "ion" && !(len > 0 && (b_[len - 1] == 's' || b_[len - 1] == 't'))) return;
            b_.resize(len);
            return;
        }
    }

    void step5a() {
        if (!ends("e")) return;
        const std::size_t len = b_.size() - 1;
        const int m = measure(len);
        if (m > 1 || (m == 1 && !cvc(len))) {
            b_.pop_back();
        }
    }

    void step5b() {
        if (measure(b_.size()) > 1 && double_consonant(b_.size()) && b_.back() == 'l') {
            b_.pop_back();
        }
    }
};

}  // namespace

std::string stem(std::string_view word) { return Stemmer(word).run(); }

}  // namespace hwqa::porter
