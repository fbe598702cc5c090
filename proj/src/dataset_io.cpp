#include "fairtree/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "fairtree/error.hpp"
#include "fairtree/rng.hpp"

namespace fairtree {

namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

// RFC 4180 style: quoted fields may contain separators, quotes ("") and newlines.
std::vector<std::vector<std::string>> parse_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    bool row_has_content = false;

    auto end_field = [&] {
        row.push_back(field_was_quoted ? field : trim(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_row = [&] {
        end_field();
        if (row_has_content || row.size() > 1 || !row.front().empty())
            rows.push_back(std::move(row));
        row.clear();
        row_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            quoted = true;
            field_was_quoted = true;
            row_has_content = true;
            break;
        case ',':
            end_field();
            row_has_content = true;
            break;
        case '\n':
            end_row();
            break;
        case '\r':
            break;
        default:
            field.push_back(c);
        }
    }
    if (quoted)
        throw DataError("csv: unterminated quoted field");
    if (!field.empty() || !row.empty())
        end_row();
    return rows;
}

std::optional<double> parse_number(const std::string& s)
{
    double v = 0.0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    if (!s.empty() && *begin == '+')
        ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        return std::nullopt;
    return v;
}

SchemaSpec::Kind parse_kind(const std::string& kind)
{
    if (kind == "numeric")
        return SchemaSpec::Kind::Numeric;
    if (kind == "categorical")
        return SchemaSpec::Kind::Categorical;
    if (kind == "label")
        return SchemaSpec::Kind::Label;
    if (kind == "ignore")
        return SchemaSpec::Kind::Ignore;
    throw DataError("schema spec: unknown column kind '" + kind + "'");
}

} // namespace

SchemaSpec SchemaSpec::from_json(const nlohmann::json& doc)
{
    try {
        SchemaSpec spec;
        for (const auto& c : doc.at("columns")) {
            Column col;
            col.name = c.at("name").get<std::string>();
            col.kind = parse_kind(c.at("kind").get<std::string>());
            if (c.contains("categories"))
                col.categories = c.at("categories").get<std::vector<std::string>>();
            if (c.contains("aliases"))
                col.aliases = c.at("aliases").get<std::map<std::string, std::string>>();
            spec.columns.push_back(std::move(col));
        }
        if (doc.contains("positive_label"))
            spec.positive_label = doc.at("positive_label").get<std::string>();
        if (doc.contains("has_header"))
            spec.has_header = doc.at("has_header").get<bool>();
        const auto labels = std::count_if(spec.columns.begin(), spec.columns.end(),
                                          [](const Column& c) { return c.kind == Kind::Label; });
        if (labels != 1)
            throw DataError("schema spec: exactly one label column is required");
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("schema spec: ") + e.what());
    }
}

SchemaSpec SchemaSpec::load(const std::filesystem::path& path)
{
    return from_json(read_json_file(path));
}

LabeledDataset parse_csv(const std::string& text, const SchemaSpec& spec, const LoadOptions& options)
{
    auto rows = parse_rows(text);
    std::vector<std::string> header;
    if (spec.has_header) {
        if (rows.empty())
            throw DataError("csv: missing header row");
        header = rows.front();
        rows.erase(rows.begin());
    } else {
        for (const auto& c : spec.columns)
            header.push_back(c.name);
    }

    // Resolve every declared column to its CSV position.
    std::vector<std::size_t> position;
    for (const auto& c : spec.columns) {
        const auto it = std::find(header.begin(), header.end(), c.name);
        if (it == header.end())
            throw DataError("csv: unknown column name '" + c.name + "'");
        position.push_back(static_cast<std::size_t>(it - header.begin()));
    }

    const std::set<std::string> missing_tokens(options.missing_tokens.begin(), options.missing_tokens.end());
    auto cell = [&](const std::vector<std::string>& row, std::size_t col) -> std::string {
        const auto pos = position[col];
        std::string value = pos < row.size() ? row[pos] : std::string();
        const auto& aliases = spec.columns[col].aliases;
        if (auto it = aliases.find(value); it != aliases.end())
            value = it->second;
        return value;
    };
    auto is_missing = [&](const std::string& v) { return missing_tokens.count(v) > 0; };

    // Which columns survive the missing-value policy.
    std::vector<bool> keep(spec.columns.size(), true);
    for (std::size_t c = 0; c < spec.columns.size(); ++c)
        if (spec.columns[c].kind == SchemaSpec::Kind::Ignore)
            keep[c] = false;
    if (options.missing == LoadOptions::MissingPolicy::DropColumns) {
        for (std::size_t c = 0; c < spec.columns.size(); ++c) {
            if (!keep[c] || spec.columns[c].kind == SchemaSpec::Kind::Label)
                continue;
            for (const auto& row : rows)
                if (is_missing(cell(row, c))) {
                    keep[c] = false;
                    break;
                }
        }
    }

    // Category lists: declared order, or sorted distinct non-missing values.
    std::vector<std::vector<std::string>> categories(spec.columns.size());
    for (std::size_t c = 0; c < spec.columns.size(); ++c) {
        const auto& col = spec.columns[c];
        if (!keep[c] && col.kind != SchemaSpec::Kind::Label)
            continue;
        if (col.kind != SchemaSpec::Kind::Categorical && col.kind != SchemaSpec::Kind::Label)
            continue;
        if (!col.categories.empty()) {
            categories[c] = col.categories;
        } else {
            std::set<std::string> distinct;
            for (const auto& row : rows)
                if (auto v = cell(row, c); !is_missing(v))
                    distinct.insert(v);
            categories[c].assign(distinct.begin(), distinct.end());
        }
    }

    LabeledDataset out;
    auto& schema = out.schema;
    std::size_t next_column = 0;
    std::size_t label_col = 0;
    for (std::size_t c = 0; c < spec.columns.size(); ++c) {
        const auto& col = spec.columns[c];
        switch (col.kind) {
        case SchemaSpec::Kind::Numeric:
            if (keep[c])
                schema.numeric_features.push_back({col.name, next_column++});
            break;
        case SchemaSpec::Kind::Categorical:
            if (keep[c]) {
                CategoricalGroup g{col.name, categories[c], {}};
                for (std::size_t k = 0; k < g.categories.size(); ++k)
                    g.columns.push_back(next_column++);
                schema.categorical_groups.push_back(std::move(g));
            }
            break;
        case SchemaSpec::Kind::Label:
            label_col = c;
            schema.label_column = col.name;
            schema.label_values = categories[c];
            break;
        case SchemaSpec::Kind::Ignore:
            break;
        }
    }
    if (spec.positive_label) {
        const auto& lv = schema.label_values;
        const auto it = std::find(lv.begin(), lv.end(), *spec.positive_label);
        if (it == lv.end())
            throw DataError("schema spec: positive label '" + *spec.positive_label + "' is not a label value");
        schema.positive_label = static_cast<std::size_t>(it - lv.begin());
    }
    schema.validate();

    const std::size_t d = schema.dimension();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        Sample x(d, 0.0);
        std::size_t column = 0;
        bool reject = false;
        int label = -1;
        for (std::size_t c = 0; c < spec.columns.size() && !reject; ++c) {
            const auto& col = spec.columns[c];
            if (col.kind == SchemaSpec::Kind::Ignore || (!keep[c] && col.kind != SchemaSpec::Kind::Label))
                continue;
            const std::string v = cell(row, c);
            if (is_missing(v)) {
                reject = true;
                break;
            }
            if (col.kind == SchemaSpec::Kind::Numeric) {
                const auto num = parse_number(v);
                if (!num)
                    throw DataError("csv row " + std::to_string(r + 1) + ": '" + v + "' is not a number in column '" +
                                    col.name + "'");
                x[column++] = *num;
                continue;
            }
            const auto& cats = categories[c];
            const auto it = std::find(cats.begin(), cats.end(), v);
            if (it == cats.end()) {
                if (options.unknown_category == LoadOptions::UnknownCategoryPolicy::RejectRow) {
                    reject = true;
                    break;
                }
                throw DataError("csv row " + std::to_string(r + 1) + ": category '" + v +
                                "' not declared for column '" + col.name + "'");
            }
            const auto k = static_cast<std::size_t>(it - cats.begin());
            if (c == label_col) {
                label = static_cast<int>(k);
            } else {
                x[column + k] = 1.0;
                column += cats.size();
            }
        }
        if (reject)
            continue;
        out.samples.push_back(std::move(x));
        out.labels.push_back(label);
    }
    if (out.samples.empty())
        throw DataError("csv: dataset is empty after dropping rows");
    return out;
}

LabeledDataset load_csv(const std::filesystem::path& path, const SchemaSpec& spec, const LoadOptions& options)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), spec, options);
}

double StandardizationStats::to_raw(std::size_t f, double standardized) const
{
    return constant[f] ? mean[f] : mean[f] + standardized * stddev[f];
}

double StandardizationStats::to_standardized(std::size_t f, double raw) const
{
    return constant[f] ? 0.0 : (raw - mean[f]) / stddev[f];
}

StandardizationStats fit_standardization(const LabeledDataset& train)
{
    if (train.empty())
        throw DataError("standardize: empty training set");
    const auto& features = train.schema.numeric_features;
    StandardizationStats stats;
    const double n = static_cast<double>(train.size());
    for (const auto& f : features) {
        double mean = 0.0;
        for (const auto& x : train.samples)
            mean += x[f.column];
        mean /= n;
        double var = 0.0;
        for (const auto& x : train.samples)
            var += (x[f.column] - mean) * (x[f.column] - mean);
        var /= n;
        const double sd = std::sqrt(var);
        stats.mean.push_back(mean);
        stats.stddev.push_back(sd);
        stats.constant.push_back(!(sd > 0.0));
    }
    return stats;
}

LabeledDataset apply_standardization(const LabeledDataset& data, const StandardizationStats& stats)
{
    LabeledDataset out = data;
    const auto& features = data.schema.numeric_features;
    if (stats.mean.size() != features.size())
        throw DataError("standardize: statistics do not match the schema");
    for (auto& x : out.samples)
        for (std::size_t f = 0; f < features.size(); ++f)
            x[features[f].column] = stats.to_standardized(f, x[features[f].column]);
    return out;
}

StandardizedSplit standardize(const LabeledDataset& train, const std::vector<LabeledDataset>& others)
{
    StandardizedSplit out;
    out.stats = fit_standardization(train);
    out.train = apply_standardization(train, out.stats);
    for (const auto& o : others) {
        if (o.schema != train.schema)
            throw DataError("standardize: datasets do not share a schema");
        out.others.push_back(apply_standardization(o, out.stats));
    }
    return out;
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double test_fraction, std::uint64_t seed)
{
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("split: test fraction must lie in (0, 1)");
    if (data.empty())
        throw DataError("split: empty dataset");
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_index(i + 1)]);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    std::vector<std::size_t> test_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    return {data.subset(train_idx), data.subset(test_idx)};
}

DecodedSample decode(const FeatureSchema& schema, const Sample& x)
{
    schema.check_sample(x);
    DecodedSample out;
    for (const auto& f : schema.numeric_features)
        out.numeric.push_back(x[f.column]);
    for (const auto& g : schema.categorical_groups)
        for (std::size_t k = 0; k < g.columns.size(); ++k)
            if (x[g.columns[k]] == 1.0)
                out.category.push_back(k);
    return out;
}

Sample encode(const FeatureSchema& schema, const DecodedSample& record)
{
    if (record.numeric.size() != schema.numeric_features.size() ||
        record.category.size() != schema.categorical_groups.size())
        throw DataError("encode: record does not match the schema");
    Sample x(schema.dimension(), 0.0);
    for (std::size_t f = 0; f < schema.numeric_features.size(); ++f)
        x[schema.numeric_features[f].column] = record.numeric[f];
    for (std::size_t g = 0; g < schema.categorical_groups.size(); ++g)
        x[schema.categorical_groups[g].columns.at(record.category[g])] = 1.0;
    return x;
}

nlohmann::json dataset_to_json(const LabeledDataset& data, const std::optional<StandardizationStats>& stats)
{
    nlohmann::json doc = {
        {"format", "fairtree-dataset"},
        {"version", 1},
        {"schema", to_json(data.schema)},
        {"samples", data.samples},
        {"labels", data.labels},
    };
    if (stats) {
        std::vector<bool> constant(stats->constant.begin(), stats->constant.end());
        doc["standardization"] = {{"mean", stats->mean}, {"stddev", stats->stddev}, {"constant", constant}};
    }
    return doc;
}

LabeledDataset dataset_from_json(const nlohmann::json& doc, std::optional<StandardizationStats>* stats)
{
    try {
        if (doc.at("format") != "fairtree-dataset")
            throw DataError("dataset document: wrong format tag");
        if (doc.at("version") != 1)
            throw DataError("dataset document: unsupported version");
        LabeledDataset data;
        data.schema = schema_from_json(doc.at("schema"));
        data.samples = doc.at("samples").get<std::vector<Sample>>();
        data.labels = doc.at("labels").get<std::vector<int>>();
        data.validate();
        if (stats) {
            stats->reset();
            if (doc.contains("standardization")) {
                const auto& s = doc.at("standardization");
                StandardizationStats st;
                st.mean = s.at("mean").get<std::vector<double>>();
                st.stddev = s.at("stddev").get<std::vector<double>>();
                st.constant = s.at("constant").get<std::vector<bool>>();
                *stats = std::move(st);
            }
        }
        return data;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("dataset document: ") + e.what());
    }
}

void save_dataset(const std::filesystem::path& path, const LabeledDataset& data,
                  const std::optional<StandardizationStats>& stats)
{
    write_text_file(path, dataset_to_json(data, stats).dump() + "\n");
}

LabeledDataset load_dataset(const std::filesystem::path& path, std::optional<StandardizationStats>* stats)
{
    return dataset_from_json(read_json_file(path), stats);
}

nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << text;
}

} // namespace fairtree
