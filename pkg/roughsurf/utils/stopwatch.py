from typing import Optional
import time


class Stopwatch:
    """
    Measures wall and CPU time of a block of work. All times are in seconds.

    Can be used directly or as a context manager::

        >>> with Stopwatch() as stopwatch:
        >>>     system = assemble(mesh, k=1.0, eta=1.0)
        >>> stopwatch.wall_time, stopwatch.cpu_time

    Args:
        start: whether or not to start the stopwatch immediately.

    Attributes:
        wall_time (float): Wall time measured by the last :func:`stop` (0 before that).
        cpu_time (float): CPU time measured by the last :func:`stop` (0 before that).
    """

    def __init__(self, start: bool = True) -> None:
        self.__wall_start: Optional[float] = None
        self.__cpu_start: Optional[float] = None
        self.wall_time = 0.0
        self.cpu_time = 0.0
        if start:
            self.start()

    @property
    def is_running(self) -> bool:
        """Whether or not the stopwatch is currently running"""
        return self.__wall_start is not None

    def start(self) -> None:
        """Starts or restarts the stopwatch"""
        self.__wall_start = time.perf_counter()
        self.__cpu_start = time.process_time()

    def peek_time(self) -> tuple[float, float]:
        """
        Returns:
            Wall and CPU times since the start, without stopping.

        Raises:
            RuntimeError: if stopwatch is not running
        """
        if not self.is_running:
            raise RuntimeError('Cannot peek the current time - the stopwatch is not running')
        return time.perf_counter() - self.__wall_start, time.process_time() - self.__cpu_start

    def stop(self) -> tuple[float, float]:
        """
        Stops the stopwatch and stores the measured times.

        Returns:
             Wall and CPU times since the start.

        Raises:
            RuntimeError: if stopwatch is not running
        """
        if not self.is_running:
            raise RuntimeError('Cannot stop - the stopwatch is not running')
        self.wall_time, self.cpu_time = self.peek_time()
        self.__wall_start = None
        self.__cpu_start = None
        return self.wall_time, self.cpu_time

    def __enter__(self) -> 'Stopwatch':
        if not self.is_running:
            self.start()
        return self

    def __exit__(self, exc_type, exc_value, traceback) -> None:
        if self.is_running:
            self.stop()
