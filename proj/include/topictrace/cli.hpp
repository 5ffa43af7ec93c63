#pragma once

namespace topictrace::cli {

// Exit codes shared by every subcommand.
constexpr int kOk = 0;
constexpr int kUsageError = 2;   // bad flags or config
constexpr int kDataError = 3;    // unreadable or invalid input data
constexpr int kNumericError = 4; // numeric failure (e.g. singular fit)

int run(int argc, const char* const* argv);

} // namespace topictrace::cli
