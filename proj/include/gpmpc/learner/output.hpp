//
// gpmpc - Copyright 2026 The gpmpc Authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <filesystem>
#include <string_view>

namespace gpmpc::learner {

/// Writes `content` to a sibling temporary file, flushes it and renames it
/// over `path`, so readers see either the old file or the complete new one.
void write_atomic(const std::filesystem::path &path, std::string_view content);

} // namespace gpmpc::learner
