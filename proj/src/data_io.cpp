#include "hesitancy/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "hesitancy/error.hpp"
#include "hesitancy/rng.hpp"

namespace hesitancy {

namespace {

using namespace std::chrono;

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

std::int64_t parse_count(std::string_view field, const std::string& file, std::size_t line,
                         std::string_view column) {
  field = trim(field);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    // Accept integral values written as reals ("12.0").
    double real = 0.0;
    auto [p2, ec2] = std::from_chars(field.data(), field.data() + field.size(), real);
    if (ec2 != std::errc{} || p2 != field.data() + field.size() || real != std::floor(real)) {
      throw ParseError(file, line, "column " + std::string(column) + ": expected a count, got '" +
                                       std::string(field) + "'");
    }
    value = static_cast<std::int64_t>(real);
  }
  if (value < 0) {
    throw ParseError(file, line, "column " + std::string(column) + ": negative count");
  }
  return value;
}

double parse_weight(std::string_view field, const std::string& file, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw ParseError(file, line, "retweet_count: expected a number, got '" + std::string(field) + "'");
  }
  if (value < 0) throw ParseError(file, line, "retweet_count: negative weight");
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return in;
}

void expect_header(std::istream& in, std::string_view expected, const std::string& file) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError(file, 1, "empty file");
  if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF) header.erase(0, 3);  // BOM
  if (trim(header) != expected) {
    throw ParseError(file, 1, "expected header '" + std::string(expected) + "'");
  }
}

bool non_decreasing(const std::vector<double>& v) {
  return std::is_sorted(v.begin(), v.end());
}

void running_max(std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::max(v[i], v[i - 1]);
}

}  // namespace

Date parse_date(std::string_view iso) {
  iso = trim(iso);
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' ||
      std::sscanf(std::string(iso).c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3) {
    throw InvalidInput("invalid date '" + std::string(iso) + "', expected YYYY-MM-DD");
  }
  year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw InvalidInput("invalid calendar date '" + std::string(iso) + "'");
  return sys_days{ymd};
}

std::string format_date(Date date) {
  year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

CleaningPolicy parse_cleaning_policy(std::string_view name) {
  if (name == "clip") return CleaningPolicy::clip;
  if (name == "strict") return CleaningPolicy::strict;
  if (name == "drop") return CleaningPolicy::drop;
  throw InvalidInput("unknown cleaning_policy '" + std::string(name) + "' (clip|strict|drop)");
}

std::string_view to_string(CleaningPolicy policy) {
  switch (policy) {
    case CleaningPolicy::clip: return "clip";
    case CleaningPolicy::strict: return "strict";
    case CleaningPolicy::drop: return "drop";
  }
  return "clip";
}

void FlowNetwork::normalize() {
  std::map<std::pair<std::string, std::string>, double> merged;
  for (auto& e : edges) merged[{e.exposed_region, e.source_region}] += e.retweet_count;
  edges.clear();
  for (auto& [key, w] : merged) edges.push_back({key.first, key.second, w});
}

double FlowNetwork::out_weight(std::string_view exposed) const {
  double total = 0.0;
  for (const auto& e : edges)
    if (e.exposed_region == exposed) total += e.retweet_count;
  return total;
}

std::size_t AlignedDataset::num_observed_intervals() const {
  const std::size_t k = num_grid_points();
  return k > first_observed + 1 ? k - 1 - first_observed : 0;
}

std::optional<std::size_t> AlignedDataset::find_region(std::string_view id) const {
  for (std::size_t i = 0; i < regions.size(); ++i)
    if (regions[i].region_id == id) return i;
  return std::nullopt;
}

std::vector<std::string> AlignedDataset::region_ids() const {
  std::vector<std::string> ids;
  ids.reserve(regions.size());
  for (const auto& r : regions) ids.push_back(r.region_id);
  return ids;
}

std::vector<RegionPanel> read_panel_csv(const std::filesystem::path& path) {
  const std::string file = path.string();
  auto in = open_input(path);
  expect_header(in, "region_id,date,population,cum_cases,cum_deaths,cum_vaccinations,antivax_posts",
                file);

  struct Row {
    Date date;
    std::int64_t population;
    double cases, deaths, vaccinations, posts;
    std::size_t line;
  };
  std::map<std::string, std::vector<Row>> by_region;
  std::vector<std::string> order;

  std::string text;
  std::size_t line = 1;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    auto fields = split_csv(text);
    if (fields.size() != 7) {
      throw ParseError(file, line, "expected 7 fields, got " + std::to_string(fields.size()));
    }
    std::string id(trim(fields[0]));
    if (id.empty()) throw ParseError(file, line, "empty region_id");
    Row row{};
    try {
      row.date = parse_date(fields[1]);
    } catch (const InvalidInput& e) {
      throw ParseError(file, line, e.what());
    }
    row.population = parse_count(fields[2], file, line, "population");
    row.cases = static_cast<double>(parse_count(fields[3], file, line, "cum_cases"));
    row.deaths = static_cast<double>(parse_count(fields[4], file, line, "cum_deaths"));
    row.vaccinations = static_cast<double>(parse_count(fields[5], file, line, "cum_vaccinations"));
    row.posts = static_cast<double>(parse_count(fields[6], file, line, "antivax_posts"));
    row.line = line;
    auto [it, inserted] = by_region.try_emplace(id);
    if (inserted) order.push_back(id);
    if (!it->second.empty() && it->second.front().population != row.population) {
      throw ParseError(file, line, "population of region " + id + " changes between rows");
    }
    it->second.push_back(row);
  }

  std::vector<RegionPanel> panels;
  panels.reserve(order.size());
  for (const auto& id : order) {
    auto& rows = by_region[id];
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    RegionPanel p;
    p.region_id = id;
    p.population = rows.front().population;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0 && rows[i].date == rows[i - 1].date) {
        throw ParseError(file, rows[i].line, "duplicate date " + format_date(rows[i].date) +
                                                 " for region " + id);
      }
      p.dates.push_back(rows[i].date);
      p.cum_cases.push_back(rows[i].cases);
      p.cum_deaths.push_back(rows[i].deaths);
      p.cum_vaccinations.push_back(rows[i].vaccinations);
      p.antivax_posts.push_back(rows[i].posts);
    }
    panels.push_back(std::move(p));
  }
  return panels;
}

FlowNetwork read_network_csv(const std::filesystem::path& path) {
  const std::string file = path.string();
  auto in = open_input(path);
  expect_header(in, "exposed_region,source_region,retweet_count", file);
  FlowNetwork net;
  std::string text;
  std::size_t line = 1;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    auto fields = split_csv(text);
    if (fields.size() != 3) {
      throw ParseError(file, line, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    FlowEdge e{std::string(trim(fields[0])), std::string(trim(fields[1])),
               parse_weight(fields[2], file, line)};
    if (e.exposed_region.empty() || e.source_region.empty()) {
      throw ParseError(file, line, "empty region id");
    }
    net.edges.push_back(std::move(e));
  }
  net.normalize();
  return net;
}

void write_panel_csv(const std::filesystem::path& path, std::span<const RegionPanel> panels) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "region_id,date,population,cum_cases,cum_deaths,cum_vaccinations,antivax_posts\n";
  char buf[256];
  for (const auto& p : panels) {
    for (std::size_t t = 0; t < p.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%s,%s,%lld,%.0f,%.0f,%.0f,%.0f\n", p.region_id.c_str(),
                    format_date(p.dates[t]).c_str(), static_cast<long long>(p.population),
                    p.cum_cases[t], p.cum_deaths[t], p.cum_vaccinations[t], p.antivax_posts[t]);
      out << buf;
    }
  }
}

void write_network_csv(const std::filesystem::path& path, const FlowNetwork& network) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "exposed_region,source_region,retweet_count\n";
  char buf[64];
  for (const auto& e : network.edges) {
    std::snprintf(buf, sizeof buf, "%.17g", e.retweet_count);
    out << e.exposed_region << ',' << e.source_region << ',' << buf << '\n';
  }
}

CleaningResult clean_panels(std::vector<RegionPanel> panels, const LoadOptions& options) {
  CleaningResult result;
  if (panels.empty()) return result;

  Date first = panels.front().dates.front();
  Date last = panels.front().dates.back();
  for (const auto& p : panels) {
    first = std::min(first, p.dates.front());
    last = std::max(last, p.dates.back());
  }
  const auto n_days = static_cast<std::size_t>((last - first).count()) + 1;

  for (auto& p : panels) {
    if (p.population <= 0) {
      result.dropped.push_back({p.region_id, "population is zero"});
      continue;
    }
    if (p.dates.front() != first) {
      result.dropped.push_back({p.region_id, "missing dates at start of window"});
      continue;
    }

    // Forward-fill short gaps onto the common daily calendar.
    RegionPanel filled;
    filled.region_id = p.region_id;
    filled.population = p.population;
    std::string gap_reason;
    std::size_t src = 0;
    int gap = 0;
    for (std::size_t d = 0; d < n_days; ++d) {
      const Date date = first + days{static_cast<int>(d)};
      filled.dates.push_back(date);
      if (src < p.size() && p.dates[src] == date) {
        filled.cum_cases.push_back(p.cum_cases[src]);
        filled.cum_deaths.push_back(p.cum_deaths[src]);
        filled.cum_vaccinations.push_back(p.cum_vaccinations[src]);
        filled.antivax_posts.push_back(p.antivax_posts[src]);
        ++src;
        gap = 0;
      } else {
        if (++gap > options.max_fill_days) {
          gap_reason = "gap of more than " + std::to_string(options.max_fill_days) + " days at " +
                       format_date(date);
          break;
        }
        filled.cum_cases.push_back(filled.cum_cases.back());
        filled.cum_deaths.push_back(filled.cum_deaths.back());
        filled.cum_vaccinations.push_back(filled.cum_vaccinations.back());
        filled.antivax_posts.push_back(0.0);
      }
    }
    if (!gap_reason.empty()) {
      result.dropped.push_back({p.region_id, gap_reason});
      continue;
    }

    const bool monotone = non_decreasing(filled.cum_cases) && non_decreasing(filled.cum_deaths) &&
                          non_decreasing(filled.cum_vaccinations);
    if (!monotone) {
      switch (options.cleaning) {
        case CleaningPolicy::strict:
          throw InvalidInput("region " + p.region_id + ": cumulative series decreases (policy=strict)");
        case CleaningPolicy::drop:
          result.dropped.push_back({p.region_id, "non-monotone cumulative series"});
          continue;
        case CleaningPolicy::clip:
          running_max(filled.cum_cases);
          running_max(filled.cum_deaths);
          running_max(filled.cum_vaccinations);
          break;
      }
    }

    const double n = static_cast<double>(filled.population);
    bool consistent = true;
    for (std::size_t t = 0; t < n_days; ++t) {
      // Deaths are a subset of cases; both running sequences stay monotone.
      filled.cum_deaths[t] = std::min(filled.cum_deaths[t], filled.cum_cases[t]);
      if (filled.cum_cases[t] + filled.cum_vaccinations[t] > n) consistent = false;
    }
    if (!consistent) {
      if (options.cleaning == CleaningPolicy::strict) {
        throw InvalidInput("region " + p.region_id + ": cases + vaccinations exceed population");
      }
      result.dropped.push_back({p.region_id, "cases + vaccinations exceed population"});
      continue;
    }
    result.kept.push_back(std::move(filled));
  }
  return result;
}

AlignedDataset align_panels(std::vector<RegionPanel> cleaned, FlowNetwork network,
                            const LoadOptions& options) {
  if (options.interval_days <= 0) throw InvalidInput("interval_days must be positive");
  AlignedDataset ds;
  ds.interval_days = options.interval_days;
  ds.lag_days = options.interval_days;
  const int step = options.interval_days;

  if (!cleaned.empty()) {
    const std::size_t n_days = cleaned.front().size();
    const std::size_t k = (n_days - 1) / static_cast<std::size_t>(step) + 1;
    if (k < 2) throw InvalidInput("panel spans fewer than two interval grid points");
    for (std::size_t g = 0; g < k; ++g) ds.grid_dates.push_back(cleaned.front().dates[g * step]);
    ds.first_observed = static_cast<std::size_t>((ds.lag_days + step - 1) / step);

    for (const auto& p : cleaned) {
      RegionSeries r;
      r.region_id = p.region_id;
      r.population = static_cast<double>(p.population);
      for (std::size_t g = 0; g < k; ++g) {
        const std::size_t d = g * step;
        const std::size_t lagged = d >= static_cast<std::size_t>(ds.lag_days) ? d - ds.lag_days : 0;
        const double c = p.cum_cases[d];
        const double v = p.cum_vaccinations[d];
        const double rec = p.cum_cases[lagged];
        r.cum_cases.push_back(c);
        r.cum_deaths.push_back(p.cum_deaths[d]);
        r.vaccinated.push_back(v);
        r.recovered.push_back(rec);
        r.infected.push_back(c - rec);
        r.susceptible.push_back(r.population - c - v);
      }
      for (std::size_t g = 1; g < k; ++g) {
        IntervalObservation obs;
        obs.cases = r.cum_cases[g] - r.cum_cases[g - 1];
        obs.vaccinations = r.vaccinated[g] - r.vaccinated[g - 1];
        obs.recovered = r.recovered[g] - r.recovered[g - 1];
        obs.susceptible_outflow = r.susceptible[g - 1] - r.susceptible[g];
        r.observed.push_back(obs);
        double posts = 0.0;
        for (std::size_t d = (g - 1) * step; d < g * step; ++d) posts += p.antivax_posts[d];
        r.mean_daily_posts.push_back(posts / step);
      }
      ds.regions.push_back(std::move(r));
    }
  }

  // Edges may only reference regions that survived cleaning.
  std::set<std::string> known;
  for (const auto& p : cleaned) known.insert(p.region_id);
  std::erase_if(network.edges, [&](const FlowEdge& e) {
    return !known.contains(e.exposed_region) || !known.contains(e.source_region);
  });
  network.normalize();
  ds.network = std::move(network);
  ds.panels = std::move(cleaned);
  return ds;
}

AlignedDataset load_dataset(const std::filesystem::path& panel_path,
                            const std::filesystem::path& network_path, const LoadOptions& options) {
  auto panels = read_panel_csv(panel_path);
  auto network = read_network_csv(network_path);
  auto cleaned = clean_panels(std::move(panels), options);
  if (cleaned.kept.empty()) throw InvalidInput("no region survived cleaning in " + panel_path.string());
  auto ds = align_panels(std::move(cleaned.kept), std::move(network), options);
  ds.dropped = std::move(cleaned.dropped);
  return ds;
}

AlignedDataset select_regions(const AlignedDataset& dataset, std::span<const std::string> ids) {
  AlignedDataset out;
  out.interval_days = dataset.interval_days;
  out.lag_days = dataset.lag_days;
  out.first_observed = dataset.first_observed;
  out.grid_dates = dataset.grid_dates;
  out.dropped = dataset.dropped;
  std::set<std::string> keep;
  for (const auto& id : ids) {
    auto idx = dataset.find_region(id);
    if (!idx) throw InvalidInput("unknown region '" + id + "'");
    if (!keep.insert(id).second) throw InvalidInput("region '" + id + "' selected twice");
    out.regions.push_back(dataset.regions[*idx]);
    for (const auto& p : dataset.panels)
      if (p.region_id == id) out.panels.push_back(p);
  }
  for (const auto& e : dataset.network.edges)
    if (keep.contains(e.exposed_region) && keep.contains(e.source_region)) out.network.edges.push_back(e);
  return out;
}

AlignedDataset subsample_regions(const AlignedDataset& dataset, std::size_t count, std::uint64_t seed) {
  const std::size_t n = dataset.num_regions();
  if (count == 0) throw InvalidInput("subsample count must be positive");
  if (count > n) {
    throw InvalidInput("cannot subsample " + std::to_string(count) + " regions from " +
                       std::to_string(n));
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (count < n) {
    auto rng = make_rng(seed, "subsample");
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + uniform_index(rng, n - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<std::string> ids;
  for (auto i : idx) ids.push_back(dataset.regions[i].region_id);
  return select_regions(dataset, ids);
}

NationalSeries national_series(const AlignedDataset& dataset) {
  NationalSeries out;
  if (dataset.panels.empty()) throw InvalidInput("dataset has no daily panels");
  const std::size_t n = dataset.panels.front().size();
  out.dates = dataset.panels.front().dates;
  out.cum_cases.assign(n, 0.0);
  out.cum_deaths.assign(n, 0.0);
  out.cum_vaccinations.assign(n, 0.0);
  for (const auto& p : dataset.panels) {
    if (p.size() != n) throw InvalidInput("panels are not aligned on a common calendar");
    out.population += static_cast<double>(p.population);
    for (std::size_t t = 0; t < n; ++t) {
      out.cum_cases[t] += p.cum_cases[t];
      out.cum_deaths[t] += p.cum_deaths[t];
      out.cum_vaccinations[t] += p.cum_vaccinations[t];
    }
  }
  return out;
}

}  // namespace hesitancy
