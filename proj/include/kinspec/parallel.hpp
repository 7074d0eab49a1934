#pragma once

#include <functional>

namespace kinspec {

// Static schedule; every index writes its own slot so results do not depend
// on the thread count.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace kinspec
