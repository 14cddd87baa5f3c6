from fem import stepper

from . import metrics


def _value(run: metrics.RunMetrics, name: str, **labels: str) -> float:
    value = run.registry.get_sample_value(name, labels)
    assert value is not None, (name, labels)
    return value


def test_run_metrics(tmp_path):
    run = metrics.RunMetrics()
    observe = run.observer('m1', 80, 1)
    for step, iterations in ((1, 3), (2, 2)):
        observe(stepper.StepRecord(step, step * 1e-3, iterations, 1e-12, 1.0,
                                   1.0, 0.0), 0.02)
    run.set_assembly('m1', 80, 1, 1.5, 81)
    run.set_drift('m1', 80, 1, 1e-14)
    run.count_failure('m1')

    labels = {'case': 'm1', 'elements': '80', 'degree': '1'}
    assert _value(run, 'ncbe_time_steps_total', **labels) == 2
    assert _value(run, 'ncbe_newton_iterations_total', **labels) == 5
    assert _value(run, 'ncbe_step_seconds_count', **labels) == 2
    assert _value(run, 'ncbe_degrees_of_freedom', **labels) == 81
    assert _value(run, 'ncbe_assembly_seconds', **labels) == 1.5
    assert _value(run, 'ncbe_hypervolume_drift', **labels) == 1e-14
    assert _value(run, 'ncbe_newton_failures_total', case='m1') == 1

    # Registries of separate runs do not share samples.
    assert metrics.RunMetrics().registry.get_sample_value(
        'ncbe_time_steps_total', labels) is None

    path = tmp_path / 'metrics.prom'
    run.write(path)
    text = path.read_text()
    assert 'ncbe_time_steps_total{case="m1",degree="1",elements="80"} 2.0' in (
        text)
