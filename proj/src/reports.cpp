#include "coti/reports.hpp"

#include <ostream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace coti {

std::string format_double(double v) { return fmt::format("{}", v); }

void write_cycle_report_csv(std::ostream& out, const RunReport& report) {
  out << "cycle,gamma_aes,gamma_con,phi_start,phi_end,training_size,web_size,final_action,selected\n";
  for (const auto& c : report.cycles) {
    out << c.cycle << ',' << format_double(c.gamma.gamma_aes) << ',' << format_double(c.gamma.gamma_con) << ','
        << format_double(c.phi_start) << ',' << format_double(c.phi_end) << ',' << c.training_size << ','
        << c.web_size << ',' << to_string(c.final_action) << ',' << fmt::format("{}", fmt::join(c.selected, ";"))
        << '\n';
  }
}

void write_schedule_trace_csv(std::ostream& out, const RunReport& report) {
  out << "epoch,phi,lr,action\n";
  for (const auto& c : report.cycles) {
    for (const auto& t : c.trace) {
      out << t.epoch << ',' << format_double(t.phi) << ',' << format_double(t.learning_rate) << ','
          << to_string(t.action) << '\n';
    }
  }
}

}  // namespace coti
