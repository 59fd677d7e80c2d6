"""
Wall-clock profiling of decorated functions. While the Profiler runs, every call of
a function decorated with @profile is timed and filed under its caller, so the
summary is a tree: e.g. FrNet.predict > FFTResidualBlock.forward > apply_mask.
Worker threads (per-sample training, per-channel masks) keep their own call stack
and file their calls under the root.
"""

import threading
import time
from functools import wraps
from typing import Dict, List, Optional, Tuple

# (name, seconds, share of the parent, calls)
SummaryRow = Tuple[str, float, float, int]


class ProfileNode():
    """accumulated time and call count of one function at one position in the call tree"""

    def __init__(self, name: str) -> None:
        self.name = name
        self.seconds = 0.
        self.calls = 0
        #: callees, by qualified name
        self.children: Dict[str, "ProfileNode"] = {}

    def child(self, name: str) -> "ProfileNode":
        node = self.children.get(name)
        if node is None:
            node = self.children[name] = ProfileNode(name)
        return node

    def totals(self, into: Optional[Dict[str, List[float]]] = None) -> Dict[str, List[float]]:
        """[seconds, calls] per function name, summed over all call sites"""
        into = {} if into is None else into
        for node in self.children.values():
            entry = into.setdefault(node.name, [0., 0])
            entry[0] += node.seconds
            entry[1] += node.calls
            node.totals(into)
        return into

    def tree_rows(self, parent_seconds: float, prefix: str = "") -> List[SummaryRow]:
        rows = []
        children = sorted(self.children.values(), key=lambda n: n.seconds, reverse=True)
        for i, node in enumerate(children):
            last = i == len(children) - 1
            # the root's children are the top level and get no connector
            connector = "" if not self.name else ("└─" if last else "├─")
            rows.append((prefix + connector + node.name, node.seconds, node.seconds / parent_seconds,
                         node.calls))
            indent = "" if not self.name else prefix + ("  " if last else "│ ")
            rows += node.tree_rows(max(node.seconds, 1e-12), indent)
        return rows


class Profiler():
    """
    Process-wide switch and store of the profile. Use Profiler.start(), run the
    code, then Profiler.print_summary() and Profiler.stop().
    """

    _lock = threading.Lock()
    _local = threading.local()
    _root = ProfileNode("")
    _started: Optional[float] = None

    @classmethod
    def start(cls) -> None:
        """start profiling, discarding earlier measurements"""
        with cls._lock:
            cls._root = ProfileNode("")
            cls._local = threading.local()
            cls._started = time.perf_counter()

    @classmethod
    def stop(cls) -> None:
        cls._started = None

    @classmethod
    def is_active(cls) -> bool:
        return cls._started is not None

    @classmethod
    def _stack(cls) -> List[ProfileNode]:
        stack = getattr(cls._local, "stack", None)
        if stack is None:
            stack = cls._local.stack = [cls._root]
        return stack

    @classmethod
    def elapsed(cls) -> float:
        return 0. if cls._started is None else time.perf_counter() - cls._started

    @classmethod
    def totals(cls) -> Dict[str, Tuple[float, int]]:
        """(seconds, calls) of every profiled function, ignoring where it was called from"""
        with cls._lock:
            return {name: (s, int(n)) for name, (s, n) in cls._root.totals().items()}

    @classmethod
    def summary(cls, nested: bool = True) -> List[SummaryRow]:
        """the rows of print_summary(); shares refer to the caller (nested) or the elapsed time"""
        if not cls.is_active():
            return []
        elapsed = max(cls.elapsed(), 1e-12)
        with cls._lock:
            if nested:
                return cls._root.tree_rows(elapsed)
            totals = cls._root.totals()
        ranked = sorted(totals.items(), key=lambda item: item[1][0], reverse=True)
        return [(name, s, s / elapsed, int(n)) for name, (s, n) in ranked]

    @classmethod
    def print_summary(cls, nested: bool = True) -> None:
        if not cls.is_active():
            print("Profiler is not running.")
            return
        print(f"profile of the last {cls.elapsed():.3f}s:")
        print(f"{'function':<60} {'seconds':>10} {'share':>8} {'calls':>8}")
        for name, seconds, share, calls in cls.summary(nested):
            print(f"{name:<60} {seconds:10.4f} {share:8.1%} {calls:8d}")


def profile(function):
    """decorator: time the function while the Profiler is running"""
    name = function.__qualname__

    @wraps(function)
    def timed(*args, **kwargs):
        if Profiler._started is None:
            return function(*args, **kwargs)
        stack = Profiler._stack()
        with Profiler._lock:
            node = stack[-1].child(name)
        stack.append(node)
        t0 = time.perf_counter()
        try:
            return function(*args, **kwargs)
        finally:
            dt = time.perf_counter() - t0
            stack.pop()
            with Profiler._lock:
                node.seconds += dt
                node.calls += 1
    return timed
