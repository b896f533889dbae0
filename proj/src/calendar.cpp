#include "fairplan/calendar.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>

namespace fairplan {
namespace {

constexpr std::int64_t kMinutesPerWeek = 7 * kMinutesPerDay;
constexpr std::int64_t kWorkingMinutesPerWeek = 5 * kMinutesPerDay;
// Monday 1970-01-05 06:00, in minutes since the epoch.
constexpr std::int64_t kAnchorMinute = 4 * kMinutesPerDay + 6 * 60;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

std::int64_t epoch_minute(EpochSeconds ts) { return floor_div(ts, 60); }

// Working minutes between the anchor and `minute`; constant across a weekend.
std::int64_t working_index(std::int64_t minute) {
  const std::int64_t offset = minute - kAnchorMinute;
  return floor_div(offset, kMinutesPerWeek) * kWorkingMinutesPerWeek +
         std::min(floor_mod(offset, kMinutesPerWeek), kWorkingMinutesPerWeek);
}

std::int64_t minute_of_working_index(std::int64_t w) {
  return kAnchorMinute + floor_div(w, kWorkingMinutesPerWeek) * kMinutesPerWeek +
         floor_mod(w, kWorkingMinutesPerWeek);
}

}  // namespace

std::string_view to_string(ShiftLabel label) {
  switch (label) {
    case ShiftLabel::early:
      return "early";
    case ShiftLabel::late:
      return "late";
    case ShiftLabel::night:
      return "night";
  }
  return "early";
}

ShiftLabel parse_shift_label(std::string_view text) {
  if (text == "early") return ShiftLabel::early;
  if (text == "late") return ShiftLabel::late;
  if (text == "night") return ShiftLabel::night;
  throw DomainError("unknown shift label '" + std::string(text) + "'");
}

EpochSeconds SolverCalendar::instant_at(SolverMinute m) const {
  const std::int64_t w = working_index(epoch_minute(reference)) + m;
  return minute_of_working_index(w) * 60;
}

SolverMinute to_solver_minutes(EpochSeconds ts, const SolverCalendar& cal) {
  if (ts < cal.reference) throw DomainError("timestamp precedes the calendar reference");
  return working_index(epoch_minute(ts)) - working_index(epoch_minute(cal.reference));
}

EpochSeconds from_solver_minutes(SolverMinute m, const SolverCalendar& cal) {
  if (m < 0) throw DomainError("negative solver minute");
  if (m > cal.horizon_minutes())
    throw DomainError("solver minute " + std::to_string(m) + " beyond horizon of " +
                      std::to_string(cal.horizon_minutes()));
  return cal.instant_at(m);
}

Shift shift_at(SolverMinute m, const SolverCalendar& cal) {
  const std::int64_t origin = working_index(epoch_minute(cal.reference));
  const std::int64_t first_shift = floor_div(origin, kMinutesPerShift);
  const std::int64_t k = floor_div(origin + m, kMinutesPerShift);
  Shift s;
  s.start = std::max<std::int64_t>(k * kMinutesPerShift - origin, 0);
  s.end = (k + 1) * kMinutesPerShift - origin;
  s.label = static_cast<ShiftLabel>(floor_mod(k, 3));
  s.day = static_cast<int>(floor_div(k, 3) - floor_div(first_shift, 3));
  return s;
}

ShiftGrid shift_grid(const SolverCalendar& cal) {
  if (cal.horizon_days < 1) throw DomainError("horizon_days must be at least 1");
  ShiftGrid grid;
  const SolverMinute horizon = cal.horizon_minutes();
  for (SolverMinute m = 0; m < horizon;) {
    Shift s = shift_at(m, cal);
    s.end = std::min(s.end, horizon);
    grid.push_back(s);
    m = s.end;
  }
  return grid;
}

bool is_working_instant(EpochSeconds ts) {
  return floor_mod(epoch_minute(ts) - kAnchorMinute, kMinutesPerWeek) < kWorkingMinutesPerWeek;
}

EpochSeconds parse_iso8601(std::string_view text) {
  auto fail = [&]() -> EpochSeconds {
    throw DomainError("malformed ISO-8601 timestamp '" + std::string(text) + "'");
  };
  if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) text.remove_suffix(1);
  auto number = [&](std::size_t pos, std::size_t len) {
    int value = 0;
    if (pos + len > text.size()) fail();
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
    if (ec != std::errc{} || ptr != text.data() + pos + len) fail();
    return value;
  };
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') fail();
  const int y = number(0, 4), mo = number(5, 2), d = number(8, 2);
  int hh = 0, mm = 0, ss = 0;
  if (text.size() > 10) {
    if ((text[10] != 'T' && text[10] != ' ') || text.size() < 16 || text[13] != ':') fail();
    hh = number(11, 2);
    mm = number(14, 2);
    if (text.size() > 16) {
      if (text[16] != ':' || text.size() != 19) fail();
      ss = number(17, 2);
    }
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) fail();
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return EpochSeconds{days} * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_iso8601(EpochSeconds ts) {
  using namespace std::chrono;
  const std::int64_t days = floor_div(ts, 86400);
  const std::int64_t secs = ts - days * 86400;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  const int h = static_cast<int>(secs / 3600), mi = static_cast<int>(secs % 3600 / 60),
            s = static_cast<int>(secs % 60);
  if (s == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h, mi);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h, mi, s);
  }
  return buf;
}

}  // namespace fairplan
