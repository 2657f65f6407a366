#pragma once

namespace sob {

/// Entry point behind the `sob` binary: encode / decode / synthesize / bench.
/// Returns 0 on success, 1 on usage errors, 2 on data errors.
int cli_main(int argc, const char* const* argv);

} // namespace sob
