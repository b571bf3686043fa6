// griddeploy: plan and execute component deployments on a described grid.
//
// Subcommands: validate, plan, paths, deploy, status, control.
// Exit codes: 0 success, 1 domain failure (infeasible plan, digest mismatch,
// illegal transition, validation findings), 2 environment failure (I/O, parse).

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "griddeploy/executor.hpp"

namespace gd = griddeploy;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gd::IoError("cannot read \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw gd::IoError("I/O failure while reading \"" + path + "\"");
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw gd::IoError("cannot write \"" + path + "\"");
    out << content;
    if (!out) throw gd::IoError("I/O failure while writing \"" + path + "\"");
}

int fail_env(const gd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
}

int fail_domain(const gd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
}

gd::UserGoal effective_goal(const gd::ComponentAssembly& assembly,
                            const std::optional<std::string>& goalFile) {
    if (goalFile) return gd::parse_goal_file(read_file(*goalFile));
    return assembly.goal.value_or(gd::UserGoal{});
}

std::string status_line(const gd::ExecutionHandle& h) {
    return "server=" + h.serverId + " state=" + gd::to_string(h.state) +
           " job=" + (h.middlewareHandle.empty() ? "-" : h.middlewareHandle) +
           " ref=" + (h.componentRef.empty() ? "-" : h.componentRef);
}

int cmd_validate(const std::string& appFile, const std::string& resourcesFile) {
    gd::ComponentAssembly assembly;
    try {
        gd::parse_catalog(read_file(resourcesFile));
        assembly = gd::parse_assembly_unchecked(read_file(appFile));
    } catch (const gd::Error& e) {
        return fail_env(e);
    }
    gd::ValidationReport report = gd::validate_assembly(assembly);
    for (const auto& f : report.findings) std::cout << f.line() << "\n";
    return report.has_errors() ? 1 : 0;
}

int cmd_plan(const std::string& appFile, const std::string& resourcesFile,
             const std::string& plannerName, const std::optional<std::string>& goalFile,
             const std::string& outFile) {
    gd::PlanningProblem problem;
    gd::PlannerKind kind;
    try {
        kind = gd::planner_kind_from_string(plannerName);
        gd::ComponentAssembly assembly = gd::parse_assembly(read_file(appFile));
        gd::GridCatalog catalog = gd::parse_catalog(read_file(resourcesFile));
        gd::UserGoal goal = effective_goal(assembly, goalFile);
        problem = gd::make_problem(std::move(assembly), std::move(catalog), std::move(goal));
    } catch (const gd::Error& e) {
        return fail_env(e);
    }
    try {
        gd::DeploymentPlan plan = gd::run_planner(kind, problem);
        gd::PlanCost cost = gd::plan_cost(problem, plan);
        write_file(outFile, gd::serialize_plan(plan));
        std::cout << "planner=" << gd::to_string(kind) << " servers=" << plan.servers.size()
                  << " cost=" << gd::format_number(cost.objectiveValue) << " feasible=true\n";
        return 0;
    } catch (const gd::IoError& e) {
        return fail_env(e);
    } catch (const gd::Error& e) {
        return fail_domain(e);
    }
}

int cmd_paths(const std::string& resourcesFile, const std::string& from, const std::string& to) {
    try {
        gd::GridCatalog catalog = gd::parse_catalog(read_file(resourcesFile));
        gd::LinkMetrics m = gd::path_metrics(catalog, from, to);
        std::cout << "latencyMs=" << gd::format_number(m.latencyMs) << " bandwidthMbps="
                  << (gd::is_unbounded(m.bandwidthMbps) ? std::string("unbounded")
                                                        : gd::format_number(m.bandwidthMbps))
                  << "\n";
        return 0;
    } catch (const gd::Error& e) {
        return fail_env(e);
    }
}

int cmd_deploy(const std::string& planFile, const std::string& appFile,
               const std::string& resourcesFile, const std::string& sessionFile,
               const std::optional<std::string>& injectFailure) {
    gd::DeploymentPlan plan;
    gd::PlanningProblem problem;
    try {
        plan = gd::deserialize_plan(read_file(planFile));
        gd::ComponentAssembly assembly = gd::parse_assembly(read_file(appFile));
        gd::GridCatalog catalog = gd::parse_catalog(read_file(resourcesFile));
        gd::UserGoal goal = assembly.goal.value_or(gd::UserGoal{});
        problem = gd::make_problem(std::move(assembly), std::move(catalog), std::move(goal));
    } catch (const gd::Error& e) {
        return fail_env(e);
    }
    try {
        gd::SimulatedGrid grid = gd::make_grid(problem.catalog);
        if (injectFailure) grid.failNodes.insert(*injectFailure);
        gd::ExecutionSession session = gd::deploy(std::move(grid), plan, problem);
        write_file(sessionFile, gd::serialize_session(session));
        std::size_t running = 0, failed = 0;
        for (const auto& [id, h] : session.handles) {
            if (h.state == gd::ProcState::Running) ++running;
            if (h.state == gd::ProcState::Failed) ++failed;
        }
        std::cout << "servers=" << session.handles.size() << " running=" << running
                  << " failed=" << failed << "\n";
        if (failed > 0) {
            std::cerr << "error: deployment stopped at the first failed submission\n";
            return 1;
        }
        return 0;
    } catch (const gd::IoError& e) {
        return fail_env(e);
    } catch (const gd::Error& e) {
        return fail_domain(e);
    }
}

int cmd_status(const std::string& sessionFile) {
    try {
        gd::ExecutionSession session = gd::deserialize_session(read_file(sessionFile));
        for (const auto& [id, h] : session.handles) std::cout << status_line(h) << "\n";
        return 0;
    } catch (const gd::Error& e) {
        return fail_env(e);
    }
}

int cmd_control(const std::string& sessionFile, const std::string& serverId,
                const std::string& actionName) {
    gd::ExecutionSession session;
    gd::LifecycleAction action;
    try {
        session = gd::deserialize_session(read_file(sessionFile));
        action = gd::lifecycle_action_from_string(actionName);
    } catch (const gd::Error& e) {
        return fail_env(e);
    }
    try {
        const gd::ExecutionHandle& handle = gd::lifecycle(session, serverId, action);
        write_file(sessionFile, gd::serialize_session(session));
        std::cout << status_line(handle) << "\n";
        return handle.state == gd::ProcState::Failed ? 1 : 0;
    } catch (const gd::IoError& e) {
        return fail_env(e);
    } catch (const gd::Error& e) {
        return fail_domain(e);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deployment planning and simulated execution for component assemblies"};
    app.require_subcommand(1);

    std::string appFile, resourcesFile, plannerName = "constrained", outFile;
    std::string planFile, sessionFile, serverId, actionName, fromNode, toNode;
    std::optional<std::string> goalFile, injectFailure;

    auto* validate = app.add_subcommand("validate", "validate an assembly and a catalog");
    validate->add_option("--app", appFile)->required();
    validate->add_option("--resources", resourcesFile)->required();

    auto* plan = app.add_subcommand("plan", "produce a deployment plan");
    plan->add_option("--app", appFile)->required();
    plan->add_option("--resources", resourcesFile)->required();
    plan->add_option("--planner", plannerName)
        ->check(CLI::IsMember({"round-robin", "constrained", "exhaustive"}));
    plan->add_option("--goal-file", goalFile);
    plan->add_option("--out", outFile)->required();

    auto* paths = app.add_subcommand("paths", "query effective path metrics between two nodes");
    paths->add_option("--resources", resourcesFile)->required();
    paths->add_option("--from", fromNode)->required();
    paths->add_option("--to", toNode)->required();

    auto* deploy = app.add_subcommand("deploy", "execute a plan against the simulated grid");
    deploy->add_option("--plan", planFile)->required();
    deploy->add_option("--app", appFile)->required();
    deploy->add_option("--resources", resourcesFile)->required();
    deploy->add_option("--session", sessionFile)->required();
    deploy->add_option("--inject-failure", injectFailure);

    auto* status = app.add_subcommand("status", "print one line per server handle");
    status->add_option("--session", sessionFile)->required();

    auto* control = app.add_subcommand("control", "apply a lifecycle action to one server");
    control->add_option("--session", sessionFile)->required();
    control->add_option("--server", serverId)->required();
    control->add_option("--action", actionName)
        ->required()
        ->check(CLI::IsMember({"cancel", "suspend", "resume", "restart"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (validate->parsed()) return cmd_validate(appFile, resourcesFile);
    if (plan->parsed()) return cmd_plan(appFile, resourcesFile, plannerName, goalFile, outFile);
    if (paths->parsed()) return cmd_paths(resourcesFile, fromNode, toNode);
    if (deploy->parsed())
        return cmd_deploy(planFile, appFile, resourcesFile, sessionFile, injectFailure);
    if (status->parsed()) return cmd_status(sessionFile);
    if (control->parsed()) return cmd_control(sessionFile, serverId, actionName);
    return 2;
}
