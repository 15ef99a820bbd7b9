"""Which asymptotic regime governs a gcd or lcm sum for given (r, s, l, k)."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .catalog import ClassParams, kronecker

GCD_THEOREMS = ("T1-Form1", "T1-Form2", "T2")
LCM_THEOREMS = ("T3-case1", "T3-case2", "T4")


@dataclass(frozen=True)
class RegimeTag:
    theorem: str
    row: str
    mode: str
    k: int
    mu: Fraction | None = None
    C_rule: str = ""
    error_descriptor: dict = field(default_factory=dict, compare=False)
    violated: tuple[str, ...] = ()

    @property
    def covered(self) -> bool:
        return self.theorem != "uncovered"

    def label(self) -> str:
        return f"{self.theorem}[{self.row}]"


def _gcd_regime(p: ClassParams, k: int) -> RegimeTag:
    r, s, ell = p.r, p.s, p.ell
    if r <= k - 1 and s <= 2 * k - 1:
        if r <= k - 2 and s <= 2 * k - 2:
            if s <= 2 * k - 3:
                err = {"x_exp": Fraction(k - 1), "log_exp": ell + 1,
                       "kappa": {"r,k-2": kronecker(r, k - 2), "s,2k-3": kronecker(s, 2 * k - 3), "l,0": kronecker(ell, 0)}}
                return RegimeTag("T1-Form1", "s<=2k-3", "gcd", k, None, "F", err)
            err = {"x_exp": Fraction(2 * k - 1, 2), "log_exp": -1}
            return RegimeTag("T1-Form1", "s=2k-2", "gcd", k, None, "F", err)
        err = {"x_exp": Fraction(k), "log_exp": "-(N+1)"}
        if r <= k - 2:
            return RegimeTag("T1-Form2", "r<=k-2,s=2k-1", "gcd", k, None, "lambda2*g(2)", err)
        if s <= 2 * k - 2:
            return RegimeTag("T1-Form2", "r=k-1,s<=2k-2", "gcd", k, None, "lambda1", err)
        return RegimeTag("T1-Form2", "r=k-1,s=2k-1", "gcd", k, None, "lambda1+lambda2*g(2)", err)
    mu = max(Fraction(r), Fraction(s - 1, 2))
    if s < 2 * r + 1:
        row, c_rule, nu = "s<2r+1", "lambda1", Fraction(-(r + 1), k)
    elif s > 2 * r + 1:
        row, c_rule, nu = "s>2r+1", "lambda2*g(2)", 1 - Fraction(s + 1, k)
    else:
        row, c_rule, nu = "s=2r+1", "lambda1+lambda2*g(2)", Fraction(-(r + 1), k)
    err = {"x_exp": mu + 1, "log_exp": ("max", nu, -2), "nu_k": nu}
    return RegimeTag("T2", row, "gcd", k, mu, c_rule, err)


def _lcm_regime(p: ClassParams, k: int) -> RegimeTag:
    r, s = p.r, p.s
    if r == 0 and s in (0, 1):
        c_rule = "lambda1" if s == 0 else "lambda1+lambda2*g(2)"
        return RegimeTag("T4", f"s={s}", "lcm", k, None, c_rule, {"x_exp": Fraction(k), "log_exp": "-(N+1)"})
    if 1 <= r <= k and s < 2 * r + 1:
        return RegimeTag("T3-case1", "1<=r<=k,s<2r+1", "lcm", k, Fraction(r), "k*lambda1*zeta(r+1)/(r+1)",
                         {"x_exp": Fraction(k + r), "log_exp": -2})
    if 2 <= s <= 2 * k and s > 2 * r + 1:
        return RegimeTag("T3-case2", "2<=s<=2k,s>2r+1", "lcm", k, Fraction(s - 1, 2),
                         "2k*g(2)*lambda2*zeta((s+1)/2)/(s+1)", {"x_exp": k + Fraction(s - 1, 2), "log_exp": -2})
    why = []
    if r >= 1 and s == 2 * r + 1:
        why.append("s = 2r+1 is excluded by both lcm cases")
    if r > k:
        why.append("r > k")
    if s > 2 * k:
        why.append("s > 2k")
    if r == 0 and s >= 2 and s > 2 * k:
        why.append("r = 0 needs s in {0, 1} or 2 <= s <= 2k")
    return RegimeTag("uncovered", "none", "lcm", k, None, "", {}, tuple(why) or ("no lcm hypothesis holds",))


def classify_regime(params: ClassParams, k: int, mode: str = "gcd") -> RegimeTag:
    """The unique regime of (r, s, l, k); lcm gaps come back as an 'uncovered' tag."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if mode == "gcd":
        return _gcd_regime(params, k)
    if mode == "lcm":
        return _lcm_regime(params, k)
    raise ValueError(f"mode must be 'gcd' or 'lcm', got {mode!r}")
