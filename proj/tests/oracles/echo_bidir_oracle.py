"""Monte-Carlo estimate of how often a stable symmetric link reads bidirectional.

Two devices, beacon k at k*period + U[0, jitter], each copy lost with p.
A's view of B is bidirectional when B's last beacon that A received within the
window listed A, i.e. B had received one of A's beacons within the window
before sending it.
"""
import random
import sys

PERIOD, JITTER, WINDOW, LATENCY = 500, 50, 1500, 5


def run(p, seconds, rng, strict):
    fresh = (lambda age: age < WINDOW) if strict else (lambda age: age <= WINDOW)
    n = seconds * 1000 // PERIOD + 2
    sends = {d: [k * PERIOD + rng.randint(0, JITTER) for k in range(n)] for d in "AB"}
    # arrivals[(x, y)] = arrival times at y of x's beacons that survived
    arr = {}
    for x, y in (("A", "B"), ("B", "A")):
        arr[(x, y)] = [(t, t + LATENCY) for t in sends[x] if rng.random() >= p]

    def lists(x, y, at):
        # does x's beacon sent at `at` list y?
        last = None
        for _, rx in arr[(y, x)]:
            if rx <= at:
                last = rx
            else:
                break
        return last is not None and fresh(at - last)

    good = total = 0
    for t in range(2000, seconds * 1000, 100):
        for x, y in (("A", "B"), ("B", "A")):
            last = None
            for sent, rx in arr[(y, x)]:
                if rx <= t:
                    last = (sent, rx)
                else:
                    break
            total += 1
            if last and fresh(t - last[1]) and lists(y, x, last[0]):
                good += 1
    return good / total


if __name__ == "__main__":
    rng = random.Random(int(sys.argv[1]) if len(sys.argv) > 1 else 1)
    for p in (0.0, 0.1, 0.2, 0.3):
        a = sum(run(p, 60, rng, True) for _ in range(40)) / 40
        b = sum(run(p, 60, rng, False) for _ in range(40)) / 40
        print(f"p={p}: age<window {a:.4f}  age<=window {b:.4f}")
