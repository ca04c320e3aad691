#pragma once

// Single entry point wiring all stages:
//   prepare -> vocab -> embed -> pretrain -> gail -> score/probe/compare/chat
// Exit codes: 0 success, 1 usage error, 2 data/model error.

namespace gailchat {

int run(int argc, const char* const* argv);

}  // namespace gailchat
