// ============================================================================
// tests/test_cli.cpp — command-line surface
// ============================================================================
//
// Drives the built binary end to end: argv[1] is the binary, argv[2] the
// bundled models directory. Prints one line per check; exits non-zero on the
// first failure.
//
// ============================================================================

#include "pdtn/semantics.hpp"
#include "pdtn/textfmt.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

std::string g_cli;
int g_failures = 0;

struct RunOutput {
    int exit_code = -1;
    std::string out;
};

std::string shell_quote(const std::string& s) { return "'" + s + "'"; }

RunOutput run_cli(const std::string& args) {
    std::string out_path = "cli_stdout.tmp";
    std::string cmd = shell_quote(g_cli) + " " + args + " > " + out_path + " 2> cli_stderr.tmp";
    int rc = std::system(cmd.c_str());
    RunOutput r;
    r.exit_code = WEXITSTATUS(rc);
    std::ifstream in(out_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

void check(bool ok, const std::string& what) {
    std::cout << (ok ? "ok   " : "FAIL ") << what << "\n";
    if (!ok) ++g_failures;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: test_cli <pdtn-binary> <models-dir>\n";
        return 2;
    }
    g_cli = argv[1];
    const std::string models = argv[2];
    const std::string fig1 = shell_quote(models + "/async_read.pdtn.json");

    using pdtn::Json;

    {
        RunOutput r = run_cli("classify " + fig1);
        bool ok = r.exit_code == 0;
        Json doc;
        if (ok) {
            doc = Json::parse(r.out, nullptr, false);
            ok = !doc.is_discarded() && doc["clock_count"] == 1 && doc["param_count"] == 1 &&
                 doc["has_invariants"] == true && doc["fully_parametric"] == false &&
                 doc["lu_partition"]["lower"] == Json::array({"p"});
        }
        check(ok, "classify reports the async-read class");
    }

    {
        RunOutput r = run_cli("reach " + fig1 + " --target error --n 3 --param p=1 --oracle "
                              "--witness cli_witness.tmp");
        Json doc = Json::parse(r.out, nullptr, false);
        bool ok = r.exit_code == 0 && !doc.is_discarded() && doc["status"] == "reachable" &&
                  doc["oracle"] == "reachable" && doc.contains("witness");
        check(ok, "reach agrees with the oracle at p=1, n=3");

        // the witness file replays to the goal
        std::ifstream win("cli_witness.tmp");
        Json w = Json::parse(win, nullptr, false);
        bool wok = !w.is_discarded() && w["n"] == 3 && w["valuation"]["p"] == 1;
        if (wok) {
            std::ifstream min(models + "/async_read.pdtn.json");
            std::ostringstream ss;
            ss << min.rdbuf();
            pdtn::GuardedPTA model = pdtn::parse_model(ss.str());
            pdtn::ParamValuation v;
            v.assignment["p"] = 1;
            pdtn::GuardedPTA conc = pdtn::valuate(model, v);
            pdtn::Trace t = pdtn::trace_from_json(w["trace"]);
            pdtn::Configuration fin = pdtn::replay(t, conc, 3);
            wok = pdtn::goal_holds(pdtn::Goal::location("error"), fin, conc);
        }
        check(wok, "witness file replays to the target");
    }

    {
        RunOutput r = run_cli("reach " + fig1 + " --target error --n 1 --param p=1 --oracle");
        Json doc = Json::parse(r.out, nullptr, false);
        check(r.exit_code == 0 && !doc.is_discarded() && doc["status"] == "unreachable" &&
                  doc["oracle"] == "unreachable",
              "reach answers unreachable with exit 0, oracle concurs");
    }

    {
        RunOutput r = run_cli("reach " + fig1 + " --target error --n 3 --param p=1 --budget 4");
        Json doc = Json::parse(r.out, nullptr, false);
        check(r.exit_code == 0 && !doc.is_discarded() && doc["status"] == "budget_exceeded",
              "budget exhaustion wraps into the answer");
    }

    {
        RunOutput r = run_cli("check " + fig1 + " --mode pr-e --target error");
        Json doc = Json::parse(r.out, nullptr, false);
        bool ok = r.exit_code == 0 && !doc.is_discarded() && doc["answer"] == "nonempty" &&
                  doc["method"] == "lu" && doc["exact"] == true && doc.contains("witness") &&
                  doc.contains("valuation");
        check(ok, "check pr-e finds a nonempty verdict via the lu route");
    }

    {
        RunOutput r = run_cli("check " + fig1 +
                              " --mode pgr-e --prop '#error = 0' --bound-n 2 --bound-p 1");
        Json doc = Json::parse(r.out, nullptr, false);
        // the initial configuration already satisfies #error = 0
        bool ok = r.exit_code == 0 && !doc.is_discarded() && doc["answer"] == "nonempty";
        check(ok, "check pgr-e accepts property goals");
    }

    {
        RunOutput a = run_cli("fmt " + fig1);
        std::ofstream tmp("cli_fmt.tmp");
        tmp << a.out;
        tmp.close();
        RunOutput b = run_cli("fmt cli_fmt.tmp");
        check(a.exit_code == 0 && b.exit_code == 0 && a.out == b.out,
              "fmt is a fixpoint on its own output");
    }

    {
        RunOutput a = run_cli("simulate " + fig1 + " --n 3 --param p=1 --steps 60 --seed 5");
        RunOutput b = run_cli("simulate " + fig1 + " --n 3 --param p=1 --steps 60 --seed 5");
        check(a.exit_code == 0 && a.out == b.out && !a.out.empty(),
              "simulate is deterministic for a fixed seed");
    }

    {
        std::string machine = shell_quote(models + "/machines/m02_inc_halt.2cm");
        RunOutput r = run_cli("compile-2cm " + machine +
                              " --encoding three -o cli_three.pdtn.json");
        Json doc = Json::parse(r.out, nullptr, false);
        bool ok = r.exit_code == 0 && !doc.is_discarded() && doc["target"] == "s_halt";
        if (ok) {
            RunOutput rr = run_cli(
                "reach cli_three.pdtn.json --target s_halt --n 3 --param p=2");
            Json rd = Json::parse(rr.out, nullptr, false);
            ok = rr.exit_code == 0 && !rd.is_discarded() && rd["status"] == "reachable";
        }
        std::ifstream side("cli_three.gadgets.json");
        ok = ok && side.good();
        check(ok, "compile-2cm emits a model plus its gadget map");
    }

    {
        RunOutput r = run_cli("reach " + fig1 + " --target nowhere --n 1 --param p=1");
        check(r.exit_code == 2, "unknown target exits 2");
        RunOutput r2 = run_cli("reach " + fig1 + " --target error --n 1");
        check(r2.exit_code == 2, "missing parameter valuation exits 2");
        RunOutput r3 = run_cli("check " + fig1 + " --mode nope --target error");
        check(r3.exit_code == 2, "bad mode exits 2");
        RunOutput r4 = run_cli("classify no_such_file.json");
        check(r4.exit_code == 2, "missing file exits 2");
        RunOutput r5 = run_cli("reach " + fig1 + " --n 1 --param p=1");
        check(r5.exit_code == 2, "missing goal exits 2");
    }

    {
        // PDTN_BUDGET is picked up when --budget is absent
        std::string cmd = "PDTN_BUDGET=4 " + shell_quote(g_cli) + " reach " + fig1 +
                          " --target error --n 3 --param p=1 > cli_stdout.tmp 2> cli_stderr.tmp";
        int rc = std::system(cmd.c_str());
        std::ifstream in("cli_stdout.tmp");
        Json doc = Json::parse(in, nullptr, false);
        check(WEXITSTATUS(rc) == 0 && !doc.is_discarded() &&
                  doc["status"] == "budget_exceeded",
              "PDTN_BUDGET overrides the default budget");
    }

    if (g_failures == 0) {
        std::cout << "all cli checks passed\n";
        return 0;
    }
    std::cout << g_failures << " cli check(s) failed\n";
    return 1;
}
