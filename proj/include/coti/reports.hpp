#pragma once

#include <iosfwd>
#include <string>

#include "coti/engine.hpp"

namespace coti {

// Shortest round-trip decimal form, as used in every CSV the tool writes.
std::string format_double(double v);

// cycle,gamma_aes,gamma_con,phi_start,phi_end,training_size,web_size,final_action,selected
void write_cycle_report_csv(std::ostream& out, const RunReport& report);
// epoch,phi,lr,action
void write_schedule_trace_csv(std::ostream& out, const RunReport& report);

}  // namespace coti
