#pragma once

#include <algorithm>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace fairtree {

/// Set of label indexes, kept sorted. Classifier outputs are nonempty sets.
class LabelSet {
public:
    LabelSet() = default;
    LabelSet(std::initializer_list<int> labels) : labels_(labels) { normalize(); }
    explicit LabelSet(std::vector<int> labels) : labels_(std::move(labels)) { normalize(); }

    static LabelSet single(int label) { return LabelSet({label}); }

    void insert(int label)
    {
        const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
        if (it == labels_.end() || *it != label)
            labels_.insert(it, label);
    }
    void merge(const LabelSet& other)
    {
        for (int l : other.labels_)
            insert(l);
    }

    bool contains(int label) const { return std::binary_search(labels_.begin(), labels_.end(), label); }
    bool empty() const { return labels_.empty(); }
    bool is_singleton() const { return labels_.size() == 1; }
    std::size_t size() const { return labels_.size(); }
    int front() const { return labels_.front(); }
    bool includes(const LabelSet& other) const
    {
        return std::includes(labels_.begin(), labels_.end(), other.labels_.begin(), other.labels_.end());
    }

    auto begin() const { return labels_.begin(); }
    auto end() const { return labels_.end(); }
    const std::vector<int>& values() const { return labels_; }

    /// "0|2" style rendering used by reports.
    std::string to_string() const
    {
        std::string s;
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (i)
                s += '|';
            s += std::to_string(labels_[i]);
        }
        return s;
    }

    bool operator==(const LabelSet&) const = default;

private:
    void normalize()
    {
        std::sort(labels_.begin(), labels_.end());
        labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
    }

    std::vector<int> labels_;
};

inline std::ostream& operator<<(std::ostream& os, const LabelSet& s)
{
    return os << '{' << s.to_string() << '}';
}

} // namespace fairtree
