"""Wave-front tracking for a 2x2 system with one genuinely nonlinear and one
linearly degenerate field, written in Riemann invariants, plus fractional
variation (TV^s) tools and an invariant-checking harness."""

__version__ = "0.1.0"
