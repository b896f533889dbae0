#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fairplan {

/// Raised when an argument lies outside an operation's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Seconds since the Unix epoch, read as a fixed local-time grid (no zones, no DST).
using EpochSeconds = std::int64_t;

/// Working minutes elapsed since a calendar's reference instant.
using SolverMinute = std::int64_t;

inline constexpr SolverMinute kMinutesPerDay = 1440;
inline constexpr SolverMinute kMinutesPerShift = 480;

enum class ShiftLabel { early, late, night };

std::string_view to_string(ShiftLabel label);
ShiftLabel parse_shift_label(std::string_view text);

/// Maps calendar instants onto the solver's minute axis. Every minute in
/// [Saturday 06:00, Monday 06:00) is excised from that axis.
struct SolverCalendar {
  EpochSeconds reference = 0;
  int horizon_days = 5;

  friend bool operator==(const SolverCalendar&, const SolverCalendar&) = default;

  SolverMinute horizon_minutes() const { return SolverMinute{horizon_days} * kMinutesPerDay; }

  /// Inverse mapping without the horizon check; used for due dates and
  /// schedules that run past the planning horizon.
  EpochSeconds instant_at(SolverMinute m) const;
};

struct Shift {
  SolverMinute start = 0;
  SolverMinute end = 0;
  ShiftLabel label = ShiftLabel::early;
  /// Working-day index relative to the day containing the reference instant.
  int day = 0;

  friend bool operator==(const Shift&, const Shift&) = default;
};

using ShiftGrid = std::vector<Shift>;

/// Working minutes between the reference and `ts`. Weekend instants snap
/// forward to Monday 06:00; seconds are truncated.
SolverMinute to_solver_minutes(EpochSeconds ts, const SolverCalendar& cal);

/// Calendar instant of solver minute `m`; throws DomainError for m < 0 or
/// m beyond the planning horizon.
EpochSeconds from_solver_minutes(SolverMinute m, const SolverCalendar& cal);

/// Early/late/night shifts covering [0, horizon) in solver minutes.
ShiftGrid shift_grid(const SolverCalendar& cal);

/// Shift containing solver minute `m`, computed for any m >= 0 regardless of the horizon.
Shift shift_at(SolverMinute m, const SolverCalendar& cal);

bool is_working_instant(EpochSeconds ts);

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM", "YYYY-MM-DDTHH:MM:SS" with an
/// optional trailing 'Z'; a space may replace 'T'.
EpochSeconds parse_iso8601(std::string_view text);

/// "YYYY-MM-DDTHH:MM" (seconds are dropped when zero).
std::string format_iso8601(EpochSeconds ts);

}  // namespace fairplan
