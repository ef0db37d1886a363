#pragma once

namespace trispline {

// Quantile of the standard normal distribution (Wichura's AS 241,
// accurate to ~1e-15 over (0,1)).
double normal_quantile(double p);

} // namespace trispline
