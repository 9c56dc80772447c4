from dirmax.oracles import ORACLES, run_oracles


class TestOracles:
    def test_all_pass_at_defaults(self):
        rows = run_oracles(n=16, seed=0)
        assert {r["oracle"] for r in rows} == set(ORACLES)
        for r in rows:
            assert r["pass"], f"{r['oracle']}: {r['deviation']} > {r['tolerance']}"

    def test_deterministic(self):
        a = run_oracles(n=12, seed=3)
        b = run_oracles(n=12, seed=3)
        assert a == b
