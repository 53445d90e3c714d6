#include "t2c/corpus.hpp"

#include "t2c/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace t2c {

namespace {

using Rng = std::mt19937_64;

template <class T>
const T& pick(Rng& rng, const std::vector<T>& xs) {
    return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng)];
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::vector<std::string> sample_distinct(Rng& rng, const std::vector<std::string>& pool, std::size_t k) {
    std::vector<std::string> xs = pool;
    std::shuffle(xs.begin(), xs.end(), rng);
    xs.resize(std::min(k, xs.size()));
    return xs;
}

double round_to(double x, int digits) {
    const double s = std::pow(10.0, digits);
    return std::round(x * s) / s;
}

const std::vector<std::string> kPrefixes = {"", "", "", "Total ", "Net ", "Avg ", "Monthly ", "Annual ", "Online "};
const std::vector<std::string> kUnits = {"", "", " (USD)", " (k)", " (m)", " %"};
const std::vector<std::string> kSeriesMeasures = {
    "Revenue", "Sales", "Profit", "Cost", "Visitors", "Downloads", "Temperature", "Rainfall", "Price",
    "Orders", "Users", "Exports", "Imports", "Output", "Demand", "Enrollment", "Traffic", "Expenses",
    "Income", "Clicks", "Sessions", "Volume", "Emissions", "Attendance"};
const std::vector<std::string> kCumulative = {
    "Cumulative Cases", "Installed Base", "Total Subscribers", "Accumulated Savings", "Running Total",
    "Cumulative Output", "Cumulative Downloads", "Total Registered", "Cumulative Capacity", "Accrued Interest",
    "Cumulative Revenue", "Stock Built Up"};
const std::vector<std::string> kYearHeaders = {"Year", "Fiscal Year", "FY", "Season", "Calendar Year"};
const std::vector<std::string> kDateHeaders = {"Date", "Month", "Period", "Week Ending", "Day", "Report Date"};
const std::vector<std::string> kIdHeaders = {"ID", "Row", "Index", "No", "Record"};
const std::vector<std::string> kNoteHeaders = {"Notes", "Comment", "Source", "Remarks", "Status"};
const std::vector<std::string> kNoteValues = {"ok", "estimated", "revised", "final", "n/a", "pending"};
const std::vector<std::string> kCategoryHeaders = {"Region", "Country", "Product", "Department", "Category",
                                                   "Brand", "Team", "Store", "City", "Segment", "Channel"};
const std::vector<std::string> kCategoryValues = {
    "North", "South", "East", "West", "Alpha", "Beta", "Gamma", "Delta", "Paris", "Tokyo", "Lagos", "Lima",
    "Oslo", "Cairo", "Retail", "Online", "Wholesale", "Direct", "Laptops", "Phones", "Tablets", "Monitors",
    "Sales", "Finance", "Legal", "Support", "Red", "Blue", "Green", "Gold"};
const std::vector<std::vector<std::string>> kComponentGroups = {
    {"Q1", "Q2", "Q3", "Q4"},
    {"Rent", "Food", "Transport", "Utilities"},
    {"Male", "Female"},
    {"Domestic", "International"},
    {"Hardware", "Software", "Services"},
    {"Wages", "Materials", "Overhead"},
    {"Under 18", "18-64", "65+"},
    {"Coal", "Gas", "Wind", "Solar"}};
const std::vector<std::string> kBarMeasures = {"Sales", "Profit", "Units Sold", "Headcount", "Budget",
                                               "Score", "Revenue", "Margin", "Orders", "Returns"};
const std::vector<std::pair<std::string, std::string>> kScatterPairs = {
    {"Height", "Weight"}, {"Age", "Income"}, {"Price", "Demand"}, {"Hours Studied", "Exam Score"},
    {"Engine Size", "Mileage"}, {"Advertising", "Sales"}, {"Temperature", "Ice Cream Sales"},
    {"GDP per Capita", "Life Expectancy"}, {"Distance", "Fare"}, {"Experience", "Salary"},
    {"Rainfall", "Crop Yield"}, {"Speed", "Braking Distance"}};
const std::vector<std::string> kLabelHeaders = {"Name", "Sample", "Subject", "Case", "Label"};
const std::vector<std::string> kShareHeaders = {"Share", "Percentage", "Proportion", "Market Share", "Fraction",
                                                "Ratio of Total"};
const std::vector<std::string> kCountHeaders = {"Count", "Votes", "Units", "Respondents", "Visits"};
const std::vector<std::string> kEntityHeaders = {"Player", "Model", "Character", "Candidate", "Athlete",
                                                 "Device"};
const std::vector<std::string> kAttributes = {"Speed", "Strength", "Agility", "Stamina", "Accuracy",
                                              "Defense", "Battery", "Camera", "Display", "Performance",
                                              "Design", "Durability", "Skill", "Vision"};

Field make_field(std::string header, std::vector<Cell> values) {
    Field f;
    f.header = std::move(header);
    f.values = std::move(values);
    f.type = infer_field_type(f.values, f.header);
    return f;
}

Field numeric_field(std::string header, const std::vector<double>& xs) {
    std::vector<Cell> v;
    for (double x : xs) v.emplace_back(x);
    return make_field(std::move(header), std::move(v));
}

Field text_field(std::string header, const std::vector<std::string>& xs) {
    std::vector<Cell> v;
    for (const auto& x : xs) v.emplace_back(x);
    return make_field(std::move(header), std::move(v));
}

std::vector<double> random_walk(Rng& rng, std::size_t n, double start, double vol, double drift) {
    std::vector<double> xs(n);
    double x = start;
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = round_to(std::max(0.0, x), 1);
        x += drift + std::normal_distribution<double>(0, vol)(rng);
    }
    return xs;
}

std::string series_header(Rng& rng, std::vector<std::string>& used) {
    for (;;) {
        std::string h = pick(rng, kPrefixes) + pick(rng, kSeriesMeasures) + pick(rng, kUnits);
        if (std::find(used.begin(), used.end(), h) == used.end()) {
            used.push_back(h);
            return h;
        }
    }
}

Field time_field(Rng& rng, std::size_t n) {
    if (coin(rng, 0.5)) {
        const int start = uniform_int(rng, 1980, 2015);
        std::vector<double> ys;
        for (std::size_t i = 0; i < n; ++i) ys.push_back(start + static_cast<int>(i));
        return numeric_field(pick(rng, kYearHeaders), ys);
    }
    const int year = uniform_int(rng, 2005, 2022);
    const bool monthly = coin(rng, 0.5);
    std::vector<std::string> ds;
    for (std::size_t i = 0; i < n; ++i) {
        char buf[16];
        if (monthly) {
            const int m = static_cast<int>(i % 12) + 1, y = year + static_cast<int>(i / 12);
            std::snprintf(buf, sizeof buf, "%04d-%02d-01", y, m);
        } else {
            const int day = static_cast<int>(i % 28) + 1, m = static_cast<int>(i / 28) % 12 + 1;
            std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, m, day);
        }
        ds.emplace_back(buf);
    }
    return text_field(pick(rng, kDateHeaders), ds);
}

std::vector<std::string> categories(Rng& rng, std::size_t n) { return sample_distinct(rng, kCategoryValues, n); }

std::vector<double> ids(std::size_t n) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(static_cast<double>(i + 1));
    return xs;
}

std::vector<std::string> notes(Rng& rng, std::size_t n) {
    std::vector<std::string> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(pick(rng, kNoteValues));
    return xs;
}

// A table plus the chart spelled with positions in `fields` before shuffling decoys in.
struct Draft {
    std::vector<Field> fields;
    ChartType type = ChartType::Line;
    std::vector<std::size_t> y, x;
    std::optional<GroupOp> grp;
};

CorpusEntry finish(Draft d, const std::string& id) {
    assign_default_roles(d.fields);
    auto table = std::make_shared<const Table>(Table::make(id, std::move(d.fields)));
    ChartSequence s{ActionToken::chart(d.type)};
    for (std::size_t f : d.y) s.push_back(ActionToken::field(f));
    s.push_back(ActionToken::sep());
    for (std::size_t f : d.x) s.push_back(ActionToken::field(f));
    s.push_back(d.grp ? ActionToken::grp(*d.grp) : ActionToken::sep());
    if (!is_complete(s) || !is_legal_prefix(*table, s, {}))
        throw Error(ErrorCode::IllegalState, "generator produced an illegal chart: " + serialize_sequence(s));
    return {table, {s}};
}

// Inserts a decoy field at a random position, shifting chart indices behind it.
void insert_decoy(Rng& rng, Draft& d, Field decoy, std::size_t min_pos = 0) {
    const auto pos = static_cast<std::size_t>(uniform_int(rng, static_cast<int>(min_pos), static_cast<int>(d.fields.size())));
    d.fields.insert(d.fields.begin() + static_cast<std::ptrdiff_t>(pos), std::move(decoy));
    for (auto* seg : {&d.y, &d.x})
        for (std::size_t& f : *seg)
            if (f >= pos) ++f;
}

Draft line_or_area(Rng& rng, bool area) {
    Draft d;
    d.type = area ? ChartType::Area : ChartType::Line;
    const auto n = static_cast<std::size_t>(uniform_int(rng, 6, 24));
    d.fields.push_back(time_field(rng, n));
    const int k = uniform_int(rng, 1, 3);
    std::vector<std::string> used;
    for (int i = 0; i < k; ++i) {
        if (area) {
            std::vector<double> xs;
            double acc = uniform(rng, 0, 50);
            for (std::size_t r = 0; r < n; ++r) xs.push_back(round_to(acc += uniform(rng, 1, 30), 1));
            std::string h;
            do h = pick(rng, kCumulative); while (std::find(used.begin(), used.end(), h) != used.end());
            used.push_back(h);
            d.fields.push_back(numeric_field(h, xs));
        } else {
            const double start = uniform(rng, 20, 500);
            d.fields.push_back(numeric_field(series_header(rng, used), random_walk(rng, n, start, start * 0.08, 0)));
        }
        d.y.push_back(d.fields.size() - 1);
    }
    d.x = {0};
    if (coin(rng, 0.35)) insert_decoy(rng, d, numeric_field(pick(rng, kIdHeaders), ids(n)));
    if (coin(rng, 0.25)) insert_decoy(rng, d, text_field(pick(rng, kNoteHeaders), notes(rng, n)));
    return d;
}

Draft bar(Rng& rng) {
    Draft d;
    d.type = ChartType::Bar;
    const auto n = static_cast<std::size_t>(uniform_int(rng, 3, 12));
    d.fields.push_back(text_field(pick(rng, kCategoryHeaders), categories(rng, n)));
    d.x = {0};
    if (coin(rng, 0.45)) {
        const auto& group = pick(rng, kComponentGroups);
        const std::size_t k = std::min<std::size_t>(group.size(), static_cast<std::size_t>(uniform_int(rng, 2, 4)));
        const auto first = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(group.size() - k)));
        const std::string unit = pick(rng, kUnits);
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<double> xs;
            for (std::size_t r = 0; r < n; ++r) xs.push_back(round_to(uniform(rng, 5, 100), 0));
            d.fields.push_back(numeric_field(group[first + i] + unit, xs));
            d.y.push_back(d.fields.size() - 1);
        }
        d.grp = GroupOp::Stack;
    } else {
        const int k = uniform_int(rng, 1, 3);
        for (const std::string& h : sample_distinct(rng, kBarMeasures, static_cast<std::size_t>(k))) {
            const double scale = uniform(rng, 10, 5000);
            std::vector<double> xs;
            for (std::size_t r = 0; r < n; ++r) xs.push_back(round_to(uniform(rng, 0.1, 1.0) * scale, 1));
            d.fields.push_back(numeric_field(h + pick(rng, kUnits), xs));
            d.y.push_back(d.fields.size() - 1);
        }
        d.grp = GroupOp::Cluster;
    }
    if (coin(rng, 0.3)) insert_decoy(rng, d, numeric_field(pick(rng, kIdHeaders), ids(n)));
    if (coin(rng, 0.2)) insert_decoy(rng, d, text_field(pick(rng, kNoteHeaders), notes(rng, n)), 1);
    return d;
}

Draft scatter(Rng& rng) {
    Draft d;
    d.type = ChartType::Scatter;
    const auto n = static_cast<std::size_t>(uniform_int(rng, 20, 80));
    const auto& [xh, yh] = pick(rng, kScatterPairs);
    const double slope = uniform(rng, -3, 3), noise = uniform(rng, 0.2, 1.5);
    std::vector<double> xs, ys;
    for (std::size_t r = 0; r < n; ++r) {
        const double x = uniform(rng, 1, 100);
        xs.push_back(round_to(x, 2));
        ys.push_back(round_to(50 + slope * x + std::normal_distribution<double>(0, 10 * noise)(rng), 2));
    }
    d.fields.push_back(numeric_field(xh + pick(rng, kUnits), xs));
    d.fields.push_back(numeric_field(yh + pick(rng, kUnits), ys));
    d.y = {1};
    d.x = {0};
    if (coin(rng, 0.4)) {
        std::vector<std::string> labels;
        const std::string base = pick(rng, kLabelHeaders);
        for (std::size_t r = 0; r < n; ++r) labels.push_back(base.substr(0, 1) + std::to_string(r + 1));
        d.fields.insert(d.fields.begin(), text_field(base, labels));
        d.y = {2};
        d.x = {1};
    }
    if (coin(rng, 0.25)) insert_decoy(rng, d, numeric_field(pick(rng, kIdHeaders), ids(n)));
    return d;
}

Draft pie(Rng& rng) {
    Draft d;
    d.type = ChartType::Pie;
    const auto n = static_cast<std::size_t>(uniform_int(rng, 3, 8));
    d.fields.push_back(text_field(pick(rng, kCategoryHeaders), categories(rng, n)));
    std::vector<double> counts;
    for (std::size_t r = 0; r < n; ++r) counts.push_back(std::round(uniform(rng, 5, 500)));
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    std::vector<double> shares;
    double acc = 0;
    for (std::size_t r = 0; r + 1 < n; ++r) {
        shares.push_back(round_to(counts[r] / total, 4));
        acc += shares.back();
    }
    shares.push_back(round_to(1.0 - acc, 4));
    const bool with_counts = coin(rng, 0.5);
    if (with_counts) d.fields.push_back(numeric_field(pick(rng, kCountHeaders), counts));
    d.fields.push_back(numeric_field(pick(rng, kShareHeaders), shares));
    d.y = {d.fields.size() - 1};
    d.x = {0};
    return d;
}

Draft radar(Rng& rng) {
    Draft d;
    d.type = ChartType::Radar;
    const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 5));
    std::vector<std::string> names;
    const std::string h = pick(rng, kEntityHeaders);
    for (std::size_t r = 0; r < n; ++r) names.push_back(h + " " + static_cast<char>('A' + r));
    d.fields.push_back(text_field(h, names));
    d.x = {0};
    for (const std::string& a : sample_distinct(rng, kAttributes, static_cast<std::size_t>(uniform_int(rng, 3, 6)))) {
        std::vector<double> xs;
        for (std::size_t r = 0; r < n; ++r) xs.push_back(std::round(uniform(rng, 20, 100)));
        d.fields.push_back(numeric_field(a, xs));
        d.y.push_back(d.fields.size() - 1);
    }
    return d;
}

}  // namespace

Corpus synth_corpus(const SynthSpec& spec) {
    if (spec.size < 1) throw Error(ErrorCode::InvalidArgument, "synthetic corpus size must be >= 1");
    const auto counts = apportion(spec.size, spec.mix);
    std::vector<ChartType> plan;
    for (std::size_t t = 0; t < counts.size(); ++t) plan.insert(plan.end(), counts[t], kAllChartTypes[t]);
    Rng rng(spec.seed);
    std::shuffle(plan.begin(), plan.end(), rng);

    Corpus out;
    out.reserve(plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i) {
        Draft d;
        switch (plan[i]) {
            case ChartType::Line: d = line_or_area(rng, false); break;
            case ChartType::Area: d = line_or_area(rng, true); break;
            case ChartType::Bar: d = bar(rng); break;
            case ChartType::Scatter: d = scatter(rng); break;
            case ChartType::Pie: d = pie(rng); break;
            case ChartType::Radar: d = radar(rng); break;
        }
        out.push_back(finish(std::move(d), "synth-" + std::to_string(spec.seed) + "-" + std::to_string(i)));
    }
    return out;
}

}  // namespace t2c
