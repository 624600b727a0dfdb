"""Per-degree weight spectra of a test configuration.

A test configuration is a homogeneous ideal together with an integer weight
on each coordinate.  In every degree k the weight vector acts diagonally on
the standard-monomial basis of the flat limit's degree-k slice; this module
computes that diagonal spectrum, its trace, the traceless version, and the
scalar summaries (dimension, total weight, trace of the squared traceless
generator, extremal eigenvalues) that the asymptotic layer interpolates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .groebner import buchberger, leading_exponent_set, standard_monomials
from .polynomials import Exponents, Polynomial, TermOrder, monomial_weight, parse_polynomial


@dataclass(frozen=True)
class TestConfiguration:
    """Homogeneous ideal plus coordinate weights, with its Groebner data.

    The weighted order keeps minimal-weight terms as initial forms, so the
    degeneration t . x_i = t^(-eta_i) x_i flows to the initial ideal as
    t -> 0.  Construction validates the input and computes the reduced
    Groebner basis once; slices in each degree are read off from it.
    """

    name: str
    variables: tuple[str, ...]
    weights: tuple[int, ...]
    generators: tuple[Polynomial, ...]
    order: TermOrder = field(init=False)
    groebner_basis: tuple[Polynomial, ...] = field(init=False)
    initial_leads: tuple[Exponents, ...] = field(init=False)

    def __post_init__(self):
        if len(self.variables) < 2:
            raise ValueError("need at least two homogeneous coordinates")
        if len(self.weights) != len(self.variables):
            raise ValueError(
                f"{len(self.weights)} weights for {len(self.variables)} variables"
            )
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        kept = []
        for g in self.generators:
            if g.nvars != len(self.variables):
                raise ValueError("generator arity does not match the variable list")
            if not g:
                continue  # zero generators carry no condition
            if g.homogeneous_degree() is None:
                raise ValueError(
                    "generators must be homogeneous: "
                    f"{g.to_string(self.variables)!r} mixes degrees"
                )
            kept.append(g)
        object.__setattr__(self, "generators", tuple(kept))
        order = TermOrder(tuple(int(w) for w in self.weights))
        object.__setattr__(self, "order", order)
        basis = tuple(buchberger(self.generators, order))
        leads = tuple(leading_exponent_set(basis, order))
        unit = (0,) * len(self.variables)
        if unit in leads:
            raise ValueError("generators span the unit ideal: the scheme is empty")
        # a pure power of every variable among the initial leads makes the
        # quotient artinian, i.e. the projective scheme is empty
        for j in range(len(self.variables)):
            if not any(
                e[j] > 0 and all(e[i] == 0 for i in range(len(e)) if i != j)
                for e in leads
            ):
                break
        else:
            raise ValueError(
                "generators cut out the empty scheme: every variable is nilpotent"
                " in the quotient"
            )
        object.__setattr__(self, "groebner_basis", basis)
        object.__setattr__(self, "initial_leads", leads)

    @staticmethod
    def from_strings(
        name: str,
        variables: tuple[str, ...],
        weights: tuple[int, ...],
        generators: tuple[str, ...],
    ) -> "TestConfiguration":
        polys = tuple(parse_polynomial(g, tuple(variables)) for g in generators)
        return TestConfiguration(name, tuple(variables), tuple(int(w) for w in weights), polys)

    def shifted(self, constant: int) -> "TestConfiguration":
        """Same ideal with every coordinate weight shifted by the constant."""
        return TestConfiguration(
            self.name,
            self.variables,
            tuple(w + constant for w in self.weights),
            self.generators,
        )


@dataclass(frozen=True)
class GradedSlice:
    """Degree-k slice data of a test configuration.

    b_spectrum lists the raw monomial weights (the diagonal of the weight
    generator on the degree-k slice), ascending; a_spectrum is its traceless
    shift b - w/d.  tr_a_sq is the exact trace of the squared traceless
    generator, sum(b^2) - w^2/d.
    """

    k: int
    monomials: tuple[Exponents, ...]
    b_spectrum: tuple[int, ...]
    dim: int
    total_weight: int
    a_spectrum: tuple[Fraction, ...]
    tr_a_sq: Fraction
    lambda_min: Fraction
    lambda_next: Fraction | None

    @property
    def mean_weight(self) -> Fraction:
        return Fraction(self.total_weight, self.dim)


def graded_slice(config: TestConfiguration, k: int) -> GradedSlice:
    if k < 1:
        raise ValueError("degree must be a positive integer")
    monomials = tuple(
        standard_monomials(config.initial_leads, len(config.variables), k)
    )
    if not monomials:
        raise ValueError(f"degree-{k} slice is empty")
    pairs = sorted(
        ((monomial_weight(m, config.weights), m) for m in monomials),
        key=lambda item: (item[0], item[1]),
    )
    b_spectrum = tuple(b for b, _ in pairs)
    ordered = tuple(m for _, m in pairs)
    dim = len(b_spectrum)
    total = sum(b_spectrum)
    mean = Fraction(total, dim)
    a_spectrum = tuple(b - mean for b in b_spectrum)
    tr_a_sq = sum((Fraction(b) ** 2 for b in b_spectrum), Fraction(0)) - Fraction(
        total**2, dim
    )
    lam_min = a_spectrum[0]
    lam_next = next((lam for lam in a_spectrum if lam != lam_min), None)
    return GradedSlice(
        k=k,
        monomials=ordered,
        b_spectrum=b_spectrum,
        dim=dim,
        total_weight=total,
        a_spectrum=a_spectrum,
        tr_a_sq=tr_a_sq,
        lambda_min=lam_min,
        lambda_next=lam_next,
    )


def spectrum_table(config: TestConfiguration, degrees: list[int]) -> list[GradedSlice]:
    return [graded_slice(config, k) for k in degrees]
