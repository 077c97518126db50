#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mispec/io/instance.hpp"

namespace mispec::io {

struct PanelRow {
  std::string agent;
  int period = 0;
  std::vector<Rational> belief;
  std::size_t line = 0;
};

/// Agent beliefs before (period 0) and after (period 1) a signal.
struct BeliefPanel {
  std::vector<PanelRow> rows;
};

namespace detail {
inline std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c); };
  while (!s.empty() && ws(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}
}  // namespace detail

/// Parses CSV with header `agent,period,belief`; beliefs are semicolon-joined
/// probabilities over a common list of states.
inline BeliefPanel parse_panel_csv(const std::string& text) {
  BeliefPanel panel;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++no;
    line = detail::trim(line);
    if (line.empty()) continue;
    auto cols = detail::split(line, ',');
    std::string where = "line " + std::to_string(no);
    if (!header) {
      if (cols != std::vector<std::string>{"agent", "period", "belief"})
        throw Error(ErrorCode::ParseError, "panel header must be 'agent,period,belief'", where);
      header = true;
      continue;
    }
    if (cols.size() != 3) throw Error(ErrorCode::ParseError, "expected 3 columns", where);
    PanelRow row;
    row.agent = cols[0];
    row.line = no;
    if (cols[1] == "0") {
      row.period = 0;
    } else if (cols[1] == "1") {
      row.period = 1;
    } else {
      throw Error(ErrorCode::ValidationError, "period must be 0 or 1", where);
    }
    for (const auto& p : detail::split(cols[2], ';')) {
      try {
        row.belief.push_back(parse_rational(p));
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, e.message(), where);
      }
    }
    panel.rows.push_back(std::move(row));
  }
  if (!header) throw Error(ErrorCode::ParseError, "panel is empty");
  return panel;
}

inline BeliefPanel load_panel(const std::string& path) { return parse_panel_csv(read_file(path)); }

/// Builds the econometrician's observables from a panel: the common prior and
/// the empirical law of period-1 beliefs.
inline ProblemInstance aggregate_panel(const BeliefPanel& panel, Mode mode = Mode::Rational) {
  if (panel.rows.empty()) throw Error(ErrorCode::ValidationError, "panel has no rows");
  std::map<std::string, std::pair<const PanelRow*, const PanelRow*>> by_agent;
  std::vector<std::string> order;
  const std::size_t d = panel.rows.front().belief.size();
  for (const auto& r : panel.rows) {
    std::string where = "line " + std::to_string(r.line);
    if (r.belief.size() != d) throw Error(ErrorCode::ValidationError, "beliefs have different lengths", where);
    auto [it, fresh] = by_agent.try_emplace(r.agent, nullptr, nullptr);
    if (fresh) order.push_back(r.agent);
    auto& slot = r.period == 0 ? it->second.first : it->second.second;
    if (slot) throw Error(ErrorCode::ValidationError, "agent '" + r.agent + "' has two rows for one period", where);
    slot = &r;
  }
  for (const auto& a : order) {
    const auto& [p0, p1] = by_agent.at(a);
    if (!p0 || !p1) throw Error(ErrorCode::ValidationError, "agent '" + a + "' needs one row for each period");
  }
  auto states = default_state_labels(d);
  auto validate = [&](const PanelRow& r) {
    try {
      return FiniteDistribution<Rational>(states, r.belief);
    } catch (const Error& e) {
      throw Error(ErrorCode::ValidationError, e.message(), "line " + std::to_string(r.line));
    }
  };
  // Modal prior; agents holding any other prior are reported.
  std::vector<std::pair<std::vector<Rational>, std::size_t>> priors;
  for (const auto& a : order) {
    const auto& b = by_agent.at(a).first->belief;
    auto it = std::find_if(priors.begin(), priors.end(), [&](const auto& p) { return p.first == b; });
    if (it == priors.end()) {
      priors.emplace_back(b, 1);
    } else {
      ++it->second;
    }
  }
  if (priors.size() > 1) {
    auto modal = std::max_element(priors.begin(), priors.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
    std::string list;
    for (const auto& a : order)
      if (by_agent.at(a).first->belief != modal->first) list += (list.empty() ? "" : ", ") + a;
    throw Error(ErrorCode::HeterogeneousPriors, "period-0 beliefs differ across agents: " + list);
  }
  auto prior = validate(*by_agent.at(order.front()).first);
  std::vector<std::pair<const PanelRow*, std::size_t>> posts;
  for (const auto& a : order) {
    const PanelRow* r = by_agent.at(a).second;
    validate(*r);
    auto it = std::find_if(posts.begin(), posts.end(), [&](const auto& p) { return p.first->belief == r->belief; });
    if (it == posts.end()) {
      posts.emplace_back(r, 1);
    } else {
      ++it->second;
    }
  }
  const auto agents = static_cast<long>(order.size());
  std::vector<EnsembleEntry<Rational>> entries;
  for (const auto& [r, count] : posts) {
    Rational w(static_cast<long>(count), agents);
    w.canonicalize();
    entries.push_back({validate(*r), w, ""});
  }
  FiniteInstance<Rational> fi{prior, FiniteEnsemble<Rational>(std::move(entries)), std::nullopt};
  ProblemInstance inst;
  inst.description = "aggregated from a panel of " + std::to_string(order.size()) + " agents";
  if (mode == Mode::Rational) {
    inst.mode = Mode::Rational;
    inst.body = std::move(fi);
  } else {
    inst.mode = Mode::Float;
    inst.body = FiniteInstance<double>{fi.prior.cast<double>(), fi.ensemble.cast<double>(), std::nullopt};
  }
  return inst;
}

}  // namespace mispec::io
