import pathlib
import typing

import prometheus_client

from fem import stepper

_LABELS = ('case', 'elements', 'degree')

# Wall time buckets of a single time step.
_STEP_BUCKETS = (1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0,
                 float('inf'))


class RunMetrics:
    """Metrics of one command invocation kept in a private registry.

    Jobs of a sweep update the metrics concurrently; they are told apart by
    the case, number of elements and degree labels.
    """

    def __init__(self) -> None:
        self.registry = prometheus_client.CollectorRegistry()
        self.m_steps = prometheus_client.Counter('ncbe_time_steps',
                                                 'Number of time steps taken',
                                                 _LABELS,
                                                 registry=self.registry)
        self.m_newton = prometheus_client.Counter(
            'ncbe_newton_iterations',
            'Number of Newton iterations over all time steps',
            _LABELS,
            registry=self.registry)
        self.m_step_time = prometheus_client.Histogram(
            'ncbe_step_seconds',
            'Wall time of a single time step',
            _LABELS,
            buckets=_STEP_BUCKETS,
            registry=self.registry)
        self.m_assembly = prometheus_client.Gauge(
            'ncbe_assembly_seconds',
            'Wall time spent assembling (or loading) the operators',
            _LABELS,
            registry=self.registry)
        self.m_dofs = prometheus_client.Gauge('ncbe_degrees_of_freedom',
                                              'Number of unknowns',
                                              _LABELS,
                                              registry=self.registry)
        self.m_drift = prometheus_client.Gauge(
            'ncbe_hypervolume_drift',
            ('Largest relative change of the discrete hypervolume over the '
             'trajectory'),
            _LABELS,
            registry=self.registry)
        self.m_failures = prometheus_client.Counter(
            'ncbe_newton_failures',
            'Number of jobs stopped by a Newton failure', ['case'],
            registry=self.registry)

    @staticmethod
    def _labels(case: str, elements: int, degree: int) -> tuple[str, ...]:
        return case, str(elements), str(degree)

    def observer(
            self, case: str, elements: int,
            degree: int) -> typing.Callable[[stepper.StepRecord, float], None]:
        """Returns a callback for `stepper.run` counting steps of one job."""
        labels = self._labels(case, elements, degree)
        steps = self.m_steps.labels(*labels)
        newton = self.m_newton.labels(*labels)
        step_time = self.m_step_time.labels(*labels)

        def observe(record: stepper.StepRecord, seconds: float) -> None:
            steps.inc()
            newton.inc(record.iterations)
            step_time.observe(seconds)

        return observe

    def set_assembly(self, case: str, elements: int, degree: int,
                     seconds: float, dofs: int) -> None:
        labels = self._labels(case, elements, degree)
        self.m_assembly.labels(*labels).set(seconds)
        self.m_dofs.labels(*labels).set(dofs)

    def set_drift(self, case: str, elements: int, degree: int,
                  drift: float) -> None:
        self.m_drift.labels(*self._labels(case, elements, degree)).set(drift)

    def count_failure(self, case: str) -> None:
        self.m_failures.labels(case).inc()

    def write(self, path: pathlib.Path) -> None:
        """Writes the registry in the text exposition format."""
        prometheus_client.write_to_textfile(str(path), self.registry)
