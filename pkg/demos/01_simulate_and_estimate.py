"""Simulate one trajectory and read Markov parameters out of it.

The model is the two-mode family at gamma = 0.6 (so a = 0.27): mode 1 is
a shift with no input, mode 2 feeds the input into the second state.
Scalar output reads the first state.  A single run of length N is enough
to estimate every Markov parameter the realization step will need; this
script estimates a handful and compares them to their closed forms.

Run:  python3 demos/01_simulate_and_estimate.py
"""

import numpy as np

from switchid import (
    SignalSpec,
    SimConfig,
    empirical_markov_batch,
    simulate,
    true_markov_map,
    two_mode_benchmark,
    word_to_str,
)


def main():
    model, dist = two_mode_benchmark(0.6)
    signal = SignalSpec(Ku_input=0.8, Ku_noise=1.0)

    print("Two-mode model, n = %d states, a = %.2f" % (model.n, model.A[0][1, 1]))
    print("Modes drawn i.i.d. with p = %s\n" % (dist.p,))

    sample = simulate(SimConfig(model=model, dist=dist, signal=signal, N=50_000, seed=7))
    freq = [float(np.mean(sample.q == c)) for c in (1, 2)]
    print("Simulated N = %d steps; mode frequencies %.3f / %.3f" % (sample.N, *freq))
    print("Largest |y| on the run: %.3f\n" % float(np.max(np.abs(sample.y))))

    # Words up to length 4.  Only five of them are nonzero for this model:
    # (2,1), then (2,1,1) and (2,2,1) at a, then two length-4 words at a^2.
    words = [()]
    frontier = [()]
    for _ in range(4):
        frontier = [w + (c,) for w in frontier for c in (1, 2)]
        words += frontier

    truth = true_markov_map(model, words)
    est = empirical_markov_batch(sample, words, signal.sigma_u(model.m), dist)

    print("%-12s %10s %10s %10s" % ("word", "true", "estimate", "error"))
    shown = 0
    for w in sorted(words, key=lambda w: (len(w), w)):
        t, e = float(truth[w][0]), float(est[w][0])
        if abs(t) > 0 or shown < 3:
            print("%-12s %10.4f %10.4f %10.2e" % (word_to_str(w) or "eps", t, e, abs(t - e)))
            shown += 1

    worst = max(float(np.max(np.abs(truth[w] - est[w]))) for w in words)
    print("\nWorst error over all %d words: %.3e" % (len(words), worst))


if __name__ == "__main__":
    main()
