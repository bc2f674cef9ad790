#pragma once

#include <string>

#include "qsl/types.hpp"

namespace qsl {

// CSV schema: header "f1,...,fd,label"; one row per point; label is an
// integer >= 1 or "?" for unlabeled. Parse failures raise DataError naming
// the offending line.
//
// Loading reorders rows so labeled points come first (stable: labeled rows
// keep their file order, then unlabeled rows keep theirs). Saving writes a
// Dataset back in its own (already labeled-first) order with full double
// precision, so save-then-load reproduces the dataset exactly.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

}  // namespace qsl
