import math
import os
import sys

module_dir = os.environ.get("RELAYDIFF_MODULE_DIR")
if module_dir:
    sys.path.insert(0, module_dir)

import _relaydiff as rd  # noqa: E402


def test_relay_roundtrip():
    cfg = rd.SimpleConfig.uniform(0.05, 0.25, -1)
    out = rd.config_update(cfg, 0.0, 0.15)
    assert out.fronts == [0.15]
    assert out.sign_at(0.10) == 1
    assert out.sign_at(0.20) == -1
    assert rd.brute_force_relay(0.10, [0.0, 0.15], -1) == 1
    back = rd.SimpleConfig.from_json(out.to_json())
    assert back.fronts == out.fronts


def test_kernels():
    dom = rd.ThresholdDomain(0.05, 0.25)
    assert abs(rd.psi(0.25, 1 / math.pi, dom) - 1.0) < 1e-14
    assert abs(rd.erf_E(1.0) - math.erf(1.0)) < 1e-14
    assert abs(rd.Phi_tail(0.05, 0.01, dom) - 1.0) < 1e-9
    assert rd.Phi_tail(0.2, 0.01, dom) < rd.Phi_tail(0.15, 0.01, dom)


def test_preisach():
    cfg = rd.SimpleConfig.uniform(0.05, 0.25, 1)
    p = rd.preisach(lambda x: 0.25 - x, cfg)
    assert abs(p - 0.2) < 1e-14


def test_small_run_and_tracking():
    dom = rd.ThresholdDomain(0.05, 0.25)
    params = rd.ModelParams(dom, 1e-4)
    params.grid_n = 400
    data = rd.InitialData(rd.U0Kind.Bump, 0.02, 0.1, 0.0,
                          rd.SimpleConfig.uniform(0.05, 0.25, 1))
    ctrl = rd.RunControl()
    ctrl.T = 2.0
    series = rd.run(params, data, ctrl)
    assert series.records[-1].t > 0
    mon = series.monitors
    assert mon.max_conservation_drift <= 1e-6
    assert mon.max_abs_w_excess <= 0.0
    tracks = rd.track(series)
    assert isinstance(tracks, list)


def test_sequence_builders():
    dom = rd.ThresholdDomain(0.05, 0.25)
    p1 = rd.build_sequences_thm1(dom, 1)
    assert rd.verify_plan1(p1)
    p2 = rd.build_sequences_thm2(2, 0.25)
    assert rd.verify_plan2(p2)
    assert p2.y[0] == 0.0
