#include "fairplan/instance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace fairplan {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

bool in_unit_range(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

struct Problems {
  std::vector<std::string> messages;
  std::vector<std::string> ids;

  void add(std::string message, std::string id) {
    messages.push_back(std::move(message));
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(std::move(id));
  }
  void raise_if_any() const {
    if (!messages.empty()) throw ValidationError(messages, ids);
  }
};

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems,
                                 std::vector<std::string> offending_ids)
    : std::runtime_error("invalid instance: " + join(problems, "; ")),
      problems_(std::move(problems)),
      offending_ids_(std::move(offending_ids)) {}

bool Worker::available(const Shift& shift) const {
  if (auto it = day_overrides.find(shift.day); it != day_overrides.end())
    return it->second.contains(shift.label);
  return shifts.contains(shift.label);
}

void HumanFactorTable::set_task(const std::string& worker, const std::string& line,
                                const std::string& geometry, TaskEntry entry) {
  tasks_[{worker, line, geometry}] = entry;
}

void HumanFactorTable::set_resilience(const std::string& worker, double rho) {
  resilience_[worker] = rho;
}

TaskFactors HumanFactorTable::lookup(const std::string& worker, const std::string& line,
                                     const std::string& geometry) const {
  TaskFactors f;
  auto it = tasks_.find({worker, line, geometry});
  if (it == tasks_.end()) return f;
  f.medical = it->second.medical;
  f.preference = it->second.preference;
  f.experience = it->second.experience;
  if (it->second.resilience) {
    f.resilience = *it->second.resilience;
  } else if (auto r = resilience_.find(worker); r != resilience_.end()) {
    f.resilience = r->second;
  }
  return f;
}

const GeometryBatch& Instance::batch(std::string_view id) const {
  for (const auto& b : batches)
    if (b.id == id) return b;
  throw DomainError("unknown batch '" + std::string(id) + "'");
}

int Instance::line_index(std::string_view id) const {
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (lines[i] == id) return static_cast<int>(i);
  return -1;
}

std::int64_t duration(const GeometryBatch& batch, const std::string& line_id) {
  auto it = batch.options.find(line_id);
  if (it == batch.options.end())
    throw DomainError("line '" + line_id + "' is not admissible for batch '" + batch.id + "'");
  const LineOption& opt = it->second;
  // Tolerance absorbs rates such as 6500/296 that are not representable exactly.
  const double minutes = static_cast<double>(batch.quantity) / opt.rate;
  const auto production = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(minutes - 1e-9)));
  return opt.setup_minutes + production;
}

void validate(const Instance& instance) {
  Problems p;
  std::set<std::string> lines;
  for (const auto& l : instance.lines)
    if (!lines.insert(l).second) p.add("duplicate line '" + l + "'", l);
  std::set<std::string> workers;
  for (const auto& w : instance.workers)
    if (!workers.insert(w.id).second) p.add("duplicate worker '" + w.id + "'", w.id);
  std::set<std::string> batches;
  for (const auto& b : instance.batches) {
    if (!batches.insert(b.id).second) p.add("duplicate batch '" + b.id + "'", b.id);
    if (b.quantity < 1) p.add("batch '" + b.id + "' has non-positive quantity", b.id);
    if (b.due_date < 0) p.add("batch '" + b.id + "' has negative due date", b.id);
    if (b.options.empty())
      p.add("geometry '" + b.geometry_id + "' of batch '" + b.id + "' has no admissible line",
            b.geometry_id);
    for (const auto& [line, opt] : b.options) {
      if (!lines.contains(line))
        p.add("batch '" + b.id + "' references unknown line '" + line + "'", line);
      if (opt.setup_minutes < 0 || !(opt.rate > 0.0) || !std::isfinite(opt.rate) ||
          opt.required_workers < 1)
        p.add("invalid option for geometry '" + b.geometry_id + "' on line '" + line + "'",
              b.geometry_id);
    }
  }
  for (const auto& [key, entry] : instance.factors.tasks()) {
    const auto& [w, l, g] = key;
    if (!workers.contains(w)) p.add("factor references unknown worker '" + w + "'", w);
    if (!lines.contains(l)) p.add("factor references unknown line '" + l + "'", l);
    if (!in_unit_range(entry.preference) || !in_unit_range(entry.experience) ||
        (entry.resilience && !in_unit_range(*entry.resilience)))
      p.add("factor for (" + w + ", " + l + ", " + g + ") outside [0,1]", w);
  }
  for (const auto& [w, rho] : instance.factors.resilience()) {
    if (!workers.contains(w)) p.add("resilience references unknown worker '" + w + "'", w);
    if (!in_unit_range(rho)) p.add("resilience of '" + w + "' outside [0,1]", w);
  }
  if (instance.calendar.horizon_days < 1) p.add("horizon_days must be positive", "horizon_days");
  p.raise_if_any();
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c != '\r') {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ValidationError({"unterminated quoted CSV field"}, {});
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

namespace {

std::int64_t parse_int(const std::string& text, const std::string& what, Problems& p,
                       const std::string& id) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    p.add("cannot parse " + what + " '" + text + "'", id);
    return 0;
  }
}

std::set<ShiftLabel> parse_labels(const json& arr) {
  std::set<ShiftLabel> out;
  for (const auto& s : arr) out.insert(parse_shift_label(s.get<std::string>()));
  return out;
}

json labels_json(const std::set<ShiftLabel>& labels) {
  json arr = json::array();
  for (auto l : labels) arr.push_back(std::string(to_string(l)));
  return arr;
}

}  // namespace

Instance load_instance(std::string_view orders_csv, std::string_view static_json,
                       const LoadOptions& options) {
  Instance inst;
  json doc;
  try {
    doc = json::parse(static_json);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("static document does not parse: ") + e.what()}, {});
  }

  Problems p;
  std::map<std::string, std::map<std::string, LineOption>> options_by_geometry;
  try {
    inst.calendar.reference = options.reference
                                  ? *options.reference
                                  : parse_iso8601(doc.at("reference").get<std::string>());
    inst.calendar.horizon_days =
        options.horizon_days ? *options.horizon_days : doc.value("horizon_days", 5);
    for (const auto& l : doc.at("lines"))
      inst.lines.push_back(l.is_string() ? l.get<std::string>() : l.at("id").get<std::string>());
    for (const auto& o : doc.at("options")) {
      LineOption opt;
      opt.setup_minutes = o.value("setup_minutes", std::int64_t{0});
      opt.rate = o.at("rate").get<double>();
      opt.required_workers = o.at("required_workers").get<int>();
      options_by_geometry[o.at("geometry_id").get<std::string>()][o.at("line_id").get<std::string>()] = opt;
    }
    for (const auto& w : doc.at("workers")) {
      Worker worker;
      worker.id = w.at("id").get<std::string>();
      worker.shifts = parse_labels(w.value("shifts", json::array()));
      if (w.contains("days"))
        for (const auto& [day, labels] : w.at("days").items())
          worker.day_overrides[std::stoi(day)] = parse_labels(labels);
      inst.workers.push_back(std::move(worker));
    }
    for (const auto& f : doc.value("factors", json::array())) {
      HumanFactorTable::TaskEntry e;
      e.medical = f.at("mu").get<int>() != 0;
      e.preference = f.at("pi").get<double>();
      e.experience = f.at("xi").get<double>();
      if (f.contains("rho") && !f.at("rho").is_null()) e.resilience = f.at("rho").get<double>();
      inst.factors.set_task(f.at("worker_id").get<std::string>(), f.at("line_id").get<std::string>(),
                            f.at("geometry_id").get<std::string>(), e);
    }
    for (const auto& r : doc.value("resilience", json::array()))
      inst.factors.set_resilience(r.at("worker_id").get<std::string>(), r.at("rho").get<double>());
  } catch (const json::exception& e) {
    throw ValidationError({std::string("static document: ") + e.what()}, {});
  } catch (const DomainError& e) {
    throw ValidationError({std::string("static document: ") + e.what()}, {});
  }

  const auto rows = parse_csv(orders_csv);
  if (rows.empty()) throw ValidationError({"orders document is empty"}, {});
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) col[trim(rows[0][i])] = i;
  for (const char* required : {"order_id", "geometry_id", "quantity", "due_date", "priority"})
    if (!col.contains(required)) p.add(std::string("orders CSV lacks column '") + required + "'", required);
  p.raise_if_any();

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto cell = [&](const std::string& name) -> std::string {
      auto it = col.find(name);
      if (it == col.end() || it->second >= row.size()) return {};
      return trim(row[it->second]);
    };
    GeometryBatch b;
    b.order_id = cell("order_id");
    b.geometry_id = cell("geometry_id");
    b.id = cell("batch_id");
    if (b.id.empty()) b.id = b.order_id + "/" + b.geometry_id;
    b.quantity = parse_int(cell("quantity"), "quantity", p, b.id);
    const std::string prio = cell("priority");
    if (prio != "0" && prio != "1") p.add("priority of '" + b.id + "' must be 0 or 1", b.id);
    b.priority = prio == "1";
    try {
      b.due_date = to_solver_minutes(parse_iso8601(cell("due_date")), inst.calendar);
    } catch (const DomainError& e) {
      p.add("due date of '" + b.id + "': " + e.what(), b.id);
    }
    if (auto it = options_by_geometry.find(b.geometry_id); it != options_by_geometry.end())
      b.options = it->second;
    inst.batches.push_back(std::move(b));
  }
  p.raise_if_any();
  validate(inst);
  return inst;
}

std::string to_orders_csv(const Instance& instance) {
  std::string out = "order_id,geometry_id,quantity,due_date,priority,batch_id\n";
  for (const auto& b : instance.batches) {
    out += csv_field(b.order_id) + "," + csv_field(b.geometry_id) + "," + std::to_string(b.quantity) +
           "," + format_iso8601(instance.calendar.instant_at(b.due_date)) + "," +
           (b.priority ? "1" : "0") + "," + csv_field(b.id) + "\n";
  }
  return out;
}

std::string to_static_json(const Instance& instance) {
  json doc;
  doc["format"] = "fairplan-static";
  doc["version"] = 1;
  doc["reference"] = format_iso8601(instance.calendar.reference);
  doc["horizon_days"] = instance.calendar.horizon_days;
  doc["lines"] = json::array();
  for (const auto& l : instance.lines) doc["lines"].push_back({{"id", l}});
  std::map<std::pair<std::string, std::string>, LineOption> options;
  for (const auto& b : instance.batches)
    for (const auto& [line, opt] : b.options) options[{b.geometry_id, line}] = opt;
  doc["options"] = json::array();
  for (const auto& [key, opt] : options)
    doc["options"].push_back({{"geometry_id", key.first},
                              {"line_id", key.second},
                              {"setup_minutes", opt.setup_minutes},
                              {"rate", opt.rate},
                              {"required_workers", opt.required_workers}});
  doc["workers"] = json::array();
  for (const auto& w : instance.workers) {
    json jw{{"id", w.id}, {"shifts", labels_json(w.shifts)}};
    if (!w.day_overrides.empty()) {
      json days = json::object();
      for (const auto& [day, labels] : w.day_overrides) days[std::to_string(day)] = labels_json(labels);
      jw["days"] = days;
    }
    doc["workers"].push_back(jw);
  }
  doc["factors"] = json::array();
  for (const auto& [key, e] : instance.factors.tasks()) {
    json f{{"worker_id", std::get<0>(key)},
           {"line_id", std::get<1>(key)},
           {"geometry_id", std::get<2>(key)},
           {"mu", e.medical ? 1 : 0},
           {"pi", e.preference},
           {"xi", e.experience}};
    if (e.resilience) f["rho"] = *e.resilience;
    doc["factors"].push_back(f);
  }
  doc["resilience"] = json::array();
  for (const auto& [w, rho] : instance.factors.resilience())
    doc["resilience"].push_back({{"worker_id", w}, {"rho", rho}});
  return doc.dump(2);
}

}  // namespace fairplan
