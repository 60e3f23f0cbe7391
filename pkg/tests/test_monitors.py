import math

import numpy as np
import pytest

from ovals import models
from ovals.classes import ProfileSamples
from ovals.monitors import (
    CollarMonitor,
    KConvexityMonitor,
    MonitorSeries,
    Watchdog,
    collar,
    cylindrical,
    k_convexity,
    monitor_estimates,
    quadratic_concavity,
)
from ovals.radial_flow import init_quarter_circle


def _gaussian_collar(tau, sym, height=3.0):
    """Inverse chart Y = C exp(-u^2 / 4(n-k)), on which the collar quantity vanishes."""
    u_grid = np.linspace(0.0, 2.0, 20001)
    rho = np.linspace(0.0, 3.0, 101)
    return ProfileSamples(
        rho=rho,
        u=np.full_like(rho, sym.cylinder_radius),
        u_grid=u_grid,
        Y=height * np.exp(-(u_grid**2) / (4.0 * sym.fiber)),
        tau=tau,
        sym=sym,
    )


def _with_curve(radius, sym):
    samples = models.quarter_circle_samples(radius, -100.0, sym)
    samples.curve = init_quarter_circle(radius, sym, 128)
    return samples


def test_quadratic_concavity(sym32):
    value, _ = quadratic_concavity(models.cylinder_samples(-100.0, sym32))
    assert abs(value) < 1e-12
    value, domain = quadratic_concavity(models.quarter_circle_samples(2.0, -100.0, sym32))
    assert value == pytest.approx(-2.0, abs=1e-6)
    assert domain == (0.0, pytest.approx(1.9))


def test_cylindrical_on_the_cylinder(sym32):
    value, domain = cylindrical(models.cylinder_samples(-10000.0, sym32), L=10.0)
    assert value == pytest.approx(0.0, abs=1e-12)
    assert domain == (0.0, pytest.approx(10.0))


def test_cylindrical_domain_empty_near_the_start(sym32):
    assert cylindrical(models.cylinder_samples(-1.0, sym32), L=10.0) is None


def test_collar_vanishes_on_gaussian_profile(sym32):
    theta = 0.3 * sym32.cylinder_radius
    value, (lo, hi) = collar(_gaussian_collar(-10000.0, sym32), L=10.0, theta=theta)
    assert value < 1e-3
    assert lo == pytest.approx(0.1)
    assert hi == pytest.approx(2.0 * theta)


def test_collar_domain_empty_at_desk_scale(sym32):
    assert collar(_gaussian_collar(-100.0, sym32), L=10.0, theta=0.3 * sym32.cylinder_radius) is None


def test_k_convexity_needs_the_polyline(sym32):
    assert k_convexity(models.cylinder_samples(-100.0, sym32)) is None


def test_k_convexity_on_round_profiles(sym32, sym42):
    value, _ = k_convexity(_with_curve(2.0, sym32))
    assert value == pytest.approx(1.0, abs=1e-12)
    value, _ = k_convexity(_with_curve(2.0, sym42))
    assert value == pytest.approx(0.75, abs=1e-2)


def test_monitor_estimates_records_empty_domains(sym32):
    samples = [models.cylinder_samples(tau, sym32) for tau in (-1.0, -10000.0)]
    series = monitor_estimates(samples, L=10.0)
    assert series.taus == [-10000.0, -1.0]
    assert math.isnan(series.cylindrical[1])
    assert series.empty["cylindrical"] == [-1.0]
    assert series.empty["k_convexity"] == [-10000.0, -1.0]
    assert series.evaluated("quadratic_concavity").size == 2
    assert series.theta == pytest.approx(0.3 * math.sqrt(2.0))
    with pytest.raises(KeyError):
        series.series("neck")


def test_watchdog_trips_after_transient():
    series = MonitorSeries(
        taus=[-30.0, -20.0, -10.0],
        quadratic_concavity=[0.5, -0.1, 0.01],
        cylindrical=[0.1, 0.1, float("nan")],
        collar=[0.05, 0.05, 0.05],
        k_convexity=[0.9, 0.9, 0.9],
    )
    watchdog = Watchdog()
    watchdog.check_monitors(series, tau_min=-20.0)
    assert not watchdog.passed()
    assert watchdog.report()["quadratic_concavity"] == [-10.0]
    assert watchdog.report()["cylindrical"] == []

    watchdog.turn_all_monitors_off()
    watchdog.check_monitors(series)
    assert watchdog.passed()


def test_monitor_conditions():
    collar_monitor = CollarMonitor(0.2)
    collar_monitor.on()
    collar_monitor.check(-5.0, 0.3)
    collar_monitor.check(-4.0, 0.1)
    assert collar_monitor.tripped == [-5.0]

    floor = KConvexityMonitor(0.0)
    assert not floor.is_active()
    floor.check(-5.0, -1.0)
    assert floor.tripped == []
    floor.on()
    floor.check(-5.0, 0.0)
    assert floor.tripped == [-5.0]
    floor.reset()
    assert floor.tripped == []
