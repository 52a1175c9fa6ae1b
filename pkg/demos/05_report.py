"""The full audit pipeline on a positive example, the Noether control, and a
genuinely broken generator; equivalent to `binoether report`."""

from pathlib import Path

from binoether import CheckConfig, builtin_system, load_system, run_report

cfg = CheckConfig(samples=16, t_end=5.0, dt=2e-3)


def show(report):
    print(f"\n=== {report.name} ===")
    for r in report.records:
        status = "PASS" if r.passed else "FAIL"
        print(f"  {status}  {r.id:<18} residual {r.residual:10.3e}  [{r.paper_anchor}]")
        if r.notes:
            print(f"        {r.notes}")
    print(f"  verdict: {'pass' if report.verdict else 'fail'}")


# the friction model: every identity and both conservation audits pass
show(run_report(builtin_system("dissipative", 2), cfg))

# the Noether control: symmetric, but the deformation [E, W] vanishes, so
# all invariants are trivially zero
show(run_report(builtin_system("canonical-noether", 2), cfg))

# a broken generator: the symmetry check fails and the "conserved" root
# c = -p decays along the flow
fixture = Path(__file__).resolve().parent.parent / "systems" / "broken-generator-n1.sys"
show(run_report(load_system(fixture), cfg))

# reports serialize to JSON (byte-identical for identical seed and config)
report = run_report(builtin_system("dissipative", 1), cfg)
out = Path(__file__).resolve().parent / "dissipative-n1.report.json"
out.write_text(report.to_json() + "\n", encoding="utf-8")
print(f"\nwrote {out.name} ({len(report.to_json())} bytes)")
