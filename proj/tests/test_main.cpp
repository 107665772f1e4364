#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "bolasso/lasso.hpp"

#include <cstdio>

// Every solution produced through solve_at in this process must satisfy the optimality conditions.
int main(int argc, char** argv) {
    doctest::Context ctx(argc, argv);
    const int rc = ctx.run();
    if (ctx.shouldExit()) return rc;
    const bolasso::KktAudit audit = bolasso::kkt_audit();
    std::printf("kkt audit: %llu solutions, max residual %.3e\n", static_cast<unsigned long long>(audit.solutions),
                audit.max_residual);
    if (audit.max_residual > 1e-8) {
        std::printf("kkt audit FAILED (limit 1e-8)\n");
        return rc ? rc : 1;
    }
    return rc;
}
