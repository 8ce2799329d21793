//! The two quadruples that resist the Hessian certificates: explicit
//! permuton families built from three large permutations, the quartic
//! density polynomials of the relevant patterns, and a nested exact-sign
//! bisection that pins the parameters where every pattern of the quadruple
//! attains its uniform density.
//!
//! Every displayed constant of the source construction is re-derived here
//! and reported item by item; a handful are known not to reproduce exactly
//! (see the check details), and those report `passed = false` rather than
//! being patched over.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixtures::{self, ExceptionalCaseFixture};
use crate::perm::Permutation;
use crate::permuton::{mixture_density_poly, StepPermuton};
use crate::poly::{BiPoly, TriPoly, UniPoly};
use crate::rat::{parse_rat, rat, rat_to_string, ratio, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseId {
    Case1,
    Case2,
}

impl CaseId {
    pub fn index(self) -> usize {
        match self {
            CaseId::Case1 => 1,
            CaseId::Case2 => 2,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(CaseId::Case1),
            2 => Ok(CaseId::Case2),
            _ => Err(Error::Other(format!("no exceptional case {i}"))),
        }
    }
}

/// One of the two special constructions, with everything recomputed from
/// its three permutations.
pub struct ExceptionalCase {
    pub id: CaseId,
    pub k: usize,
    pub perms: [Permutation; 3],
    /// The two representative patterns whose curve polynomials drive the
    /// parameter search.
    pub patterns: [Permutation; 2],
    /// The full quadruple the witness is for.
    pub quadruple: [Permutation; 4],
    /// Exact density polynomials in the mixture weights `(x, y, z)` for all
    /// four quadruple patterns, keyed by pattern.
    pub d_polys: Vec<(Permutation, TriPoly)>,
    /// `g1(s, t) = d(patterns[0], ...)` under `x = st, y = s(1-t), z = 1-s`.
    pub g1: BiPoly,
    pub g2: BiPoly,
    pub t_domain: (Rat, Rat),
    fixture: ExceptionalCaseFixture,
    monomial_order: Vec<String>,
}

pub fn build_case(id: CaseId) -> Result<ExceptionalCase> {
    let all = fixtures::exceptional_cases();
    let fixture = all
        .cases
        .iter()
        .find(|c| c.id == id.index())
        .cloned()
        .ok_or_else(|| Error::Other("case fixture missing".into()))?;
    let perms_v = fixture.perms()?;
    let perms: [Permutation; 3] =
        [perms_v[0].clone(), perms_v[1].clone(), perms_v[2].clone()];
    let patterns: [Permutation; 2] =
        [fixture.patterns[0].parse()?, fixture.patterns[1].parse()?];
    let quadruple: [Permutation; 4] = [
        fixture.quadruple[0].parse()?,
        fixture.quadruple[1].parse()?,
        fixture.quadruple[2].parse()?,
        fixture.quadruple[3].parse()?,
    ];
    let mut d_polys = Vec::new();
    for pat in &quadruple {
        d_polys.push((pat.clone(), mixture_density_poly(pat, &perms)?));
    }
    let poly_for = |p: &Permutation| -> TriPoly {
        d_polys
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, d)| d.clone())
            .expect("pattern is part of the quadruple")
    };
    let g1 = poly_for(&patterns[0]).substitute_st();
    let g2 = poly_for(&patterns[1]).substitute_st();
    let t_domain = fixture.t_domain_rats()?;
    Ok(ExceptionalCase {
        id,
        k: fixture.k,
        perms,
        patterns,
        quadruple,
        d_polys,
        g1,
        g2,
        t_domain,
        fixture,
        monomial_order: all.monomial_order,
    })
}

/// One named verification item.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.to_string(), passed, detail: detail.into() }
    }
}

/// Compares the recomputed density and curve polynomials against the
/// displayed coefficient listings, and records the claimed symmetry
/// pairings among the quadruple patterns.
pub fn verify_case_polynomials(case: &ExceptionalCase) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for pat in &case.patterns {
        let displayed =
            case.fixture.displayed_d_poly(&case.monomial_order, &pat.to_string())?;
        let computed = case
            .d_polys
            .iter()
            .find(|(q, _)| q == pat)
            .map(|(_, d)| d)
            .expect("pattern present");
        checks.push(Check::new(
            &format!("case{}.density_poly_{}", case.id.index(), pat),
            computed == &displayed,
            "recomputed quartic density polynomial vs displayed coefficients",
        ));
    }
    for (which, computed) in [("g1", &case.g1), ("g2", &case.g2)] {
        let displayed = case.fixture.displayed_g_poly(which)?;
        checks.push(Check::new(
            &format!("case{}.curve_poly_{which}", case.id.index()),
            computed == &displayed,
            "substituted curve polynomial vs displayed coefficients",
        ));
    }
    for (a, b) in &case.fixture.rotation_partners {
        let pa: Permutation = a.parse()?;
        let pb: Permutation = b.parse()?;
        let da = case.d_polys.iter().find(|(q, _)| q == &pa).map(|(_, d)| d);
        let db = case.d_polys.iter().find(|(q, _)| q == &pb).map(|(_, d)| d);
        let equal = match (da, db) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        };
        checks.push(Check::new(
            &format!("case{}.symmetry_{a}_{b}", case.id.index()),
            equal,
            if equal {
                "density polynomials agree symbolically".to_string()
            } else {
                format!(
                    "claimed symmetric pair has different density polynomials; \
                     d({a}) != d({b}) as polynomials in the mixture weights"
                )
            },
        ));
    }
    Ok(checks)
}

fn bi_from_int_coeffs(coeffs: &[((u32, u32), i64)]) -> BiPoly {
    let mut p = BiPoly::zero();
    for &((i, j), c) in coeffs {
        p.add_term(i, j, rat(c));
    }
    p
}

fn uni_from_t(coeffs: &[i64]) -> UniPoly {
    UniPoly::from_i64(coeffs)
}

fn exact_eq_check(name: &str, value: &Rat, displayed: &str) -> Check {
    let shown = parse_rat(displayed).expect("displayed constant parses");
    let passed = value == &shown;
    Check::new(
        name,
        passed,
        if passed {
            format!("exact value {}", rat_to_string(value))
        } else {
            format!("exact value {} differs from displayed {displayed}", rat_to_string(value))
        },
    )
}

/// Replays the published chain of inequalities behind the two parameter
/// lemmas, entirely in exact arithmetic: displayed derivative and
/// discriminant polynomials, point evaluations, sign claims on the stated
/// domains, and the interval endpoints that the bisection relies on.
pub fn verify_lemma_facts(case: &ExceptionalCase) -> Result<Vec<Check>> {
    match case.id {
        CaseId::Case1 => verify_case1_facts(case),
        CaseId::Case2 => verify_case2_facts(case),
    }
}

fn verify_case1_facts(case: &ExceptionalCase) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let sum = case.g1.add(&case.g2);
    let dsum = sum.d_dx();

    // 65536 * d/ds (g1 + g2) = (12858t^2 - 11004t + 4545) s^2
    //                        + (8632t^2 - 9172t - 43) s - 390t + 872
    let displayed = bi_from_int_coeffs(&[
        ((2, 2), 12858),
        ((2, 1), -11004),
        ((2, 0), 4545),
        ((1, 2), 8632),
        ((1, 1), -9172),
        ((1, 0), -43),
        ((0, 1), -390),
        ((0, 0), 872),
    ]);
    checks.push(Check::new(
        "case1.derivative_display",
        dsum.scale(&rat(65536)) == displayed,
        "65536 * d/ds(g1+g2) vs displayed quadratic in s",
    ));

    let a_t = uni_from_t(&[4545, -11004, 12858]);
    let b_t = uni_from_t(&[-43, -9172, 8632]);
    let c_t = uni_from_t(&[872, -390]);
    checks.push(Check::new(
        "case1.numerator_constant_term_positive",
        c_t.eval(&rat(0)).is_positive() && c_t.eval(&rat(1)).is_positive(),
        "872 - 390t > 0 at both ends of [0, 1] (linear)",
    ));

    // discriminant D(t) = b^2 - 4ac
    let disc = b_t.mul(&b_t).sub(&a_t.mul(&c_t).scale(&rat(4)));
    let disc_display =
        uni_from_t(&[-15851111, 46260944, 21368288, -138286928, 74511424]);
    checks.push(Check::new(
        "case1.discriminant_display",
        disc == disc_display,
        "D(t) = b^2 - 4ac vs displayed quartic",
    ));
    let ddisc = disc.derivative();
    checks.push(Check::new(
        "case1.discriminant_derivative_display",
        ddisc == uni_from_t(&[46260944, 42736576, -414860784, 298045696]),
        "D'(t) vs displayed cubic",
    ));

    for (t, displayed_value) in [
        ("-1", "-709382112"),
        ("0", "46260944"),
        ("12697/25000", "122688081741911/122070312500"),
        ("50789/100000", "-1856263737032121/3906250000000"),
        ("1", "-27817568"),
        ("2", "856656528"),
    ] {
        let tv = parse_rat(t)?;
        checks.push(exact_eq_check(
            &format!("case1.dD_at_{}", t.replace('/', "_").replace('-', "m")),
            &ddisc.eval(&tv),
            displayed_value,
        ));
    }

    // D' has exactly one root in [0, 1], bracketed by the two listed points
    let lo = ratio(12697, 25000); // 0.50788
    let hi = ratio(50789, 100000); // 0.50789
    let one_root = ddisc.count_roots_between(&rat(0), &rat(1)) == 1
        && ddisc.eval(&lo).is_positive()
        && ddisc.eval(&hi).is_negative();
    checks.push(Check::new(
        "case1.discriminant_derivative_root_bracket",
        one_root,
        "unique root of D' in [0, 1] lies in (0.50788, 0.50789)",
    ));

    // upper bound for D at the critical point, term-by-term monotone
    let bound = rat(74511424) * pow(&hi, 4) - rat(138286928) * pow(&lo, 3)
        + rat(21368288) * pow(&hi, 2)
        + rat(46260944) * &hi
        - rat(15851111);
    checks.push(exact_eq_check(
        "case1.discriminant_peak_bound",
        &bound,
        "-2795347632052487974719/1562500000000000000",
    ));
    checks.push(Check::new(
        "case1.discriminant_peak_bound_negative",
        bound.is_negative(),
        "the peak bound certifies D(t0) < 0; D rises before t0 and falls after",
    ));
    checks.push(Check::new(
        "case1.discriminant_negative_on_01",
        disc.sign_on_interval(&rat(0), &rat(1)) == Some(-1),
        "independent root-exclusion check that D < 0 on [0, 1]",
    ));
    // with D < 0 the numerator has no root in s, and it is positive at
    // s = 0, hence d/ds(g1+g2) > 0 everywhere on the strip

    // endpoints of the inner bisection
    let sum_s0 = sum.fix_x(&rat(0));
    checks.push(Check::new(
        "case1.sum_at_s0",
        sum_s0.degree().is_none_or(|d| d == 0)
            && sum_s0.eval(&rat(0)) == ratio(32363, 393216)
            && sum_s0.eval(&rat(0)) < ratio(1, 12),
        "g1(0,t) + g2(0,t) = 32363/393216 < 1/12, independent of t",
    ));
    let sum_s1 = sum.fix_x(&rat(1));
    let q = uni_from_t(&[1149, -4322, 4301]).scale(&ratio(1, 32768));
    let shifted = sum_s1.sub(&q);
    checks.push(Check::new(
        "case1.sum_at_s1_identity",
        shifted == UniPoly::new(vec![ratio(1, 12)]),
        "g1(1,t) + g2(1,t) - 1/12 = (4301t^2 - 4322t + 1149)/32768",
    ));
    // positivity of the quadratic: 4301t^2-4322t+1149 >= t^2+4300(t-1/2)^2+52
    // on [0,1] (the slack is 22(1-t)), and the right side is at least 52
    let rewrite = {
        let mut p = uni_from_t(&[1127, -4300, 4301]);
        // t^2 + 4300 (t - 1/2)^2 + 52 expanded
        let expanded = UniPoly::new(vec![rat(1075) + rat(52), rat(-4300), rat(4301)]);
        let ok = p == expanded;
        p = uni_from_t(&[1149, -4322, 4301]).sub(&uni_from_t(&[1127, -4300, 4301]));
        ok && p == uni_from_t(&[22, -22])
            && uni_from_t(&[22, -22]).eval(&rat(0)).is_positive()
            && uni_from_t(&[22, -22]).eval(&rat(1)).is_zero()
    };
    checks.push(Check::new(
        "case1.sum_at_s1_positive",
        rewrite,
        "the quadratic dominates t^2 + 4300(t-1/2)^2 + 52 >= 52 on [0, 1]",
    ));

    // the t = 0 slice
    let g1_s0 = case.g1.fix_y(&rat(0)).scale(&rat(786432));
    let g2_s0 = case.g2.fix_y(&rat(0)).scale(&rat(786432));
    checks.push(Check::new(
        "case1.slice_t0_display",
        g1_s0 == uni_from_t(&[32343, -22600, 1927, 10530])
            && g2_s0 == uni_from_t(&[32383, 33064, -2185, 7650]),
        "g1(s,0), g2(s,0) times 786432 vs displayed cubics",
    ));
    let sum_7_10 = sum.eval(&ratio(7, 10), &rat(0));
    checks.push(exact_eq_check("case1.sum_at_7_10_t0", &sum_7_10, "1954003/19660800"));
    checks.push(Check::new(
        "case1.sum_at_7_10_t0_above_target",
        sum_7_10 > ratio(1, 12),
        "forces s(0) < 7/10",
    ));
    let dg1_s0 = case.g1.fix_y(&rat(0)).derivative().scale(&rat(786432));
    let dg1_display = uni_from_t(&[-22600, 3854, 31590]);
    let decreasing = dg1_s0 == dg1_display
        && dg1_display.eval(&rat(0)).is_negative()
        && dg1_display.eval(&ratio(7, 10)).is_negative();
    checks.push(Check::new(
        "case1.g1_decreasing_on_t0_slice",
        decreasing,
        "convex quadratic negative at 0 and 7/10, so g1(., 0) falls on [0, 7/10]",
    ));
    checks.push(Check::new(
        "case1.h_at_0_below_target",
        case.g1.eval(&rat(0), &rat(0)) == ratio(32343, 786432)
            && ratio(32343, 786432) < ratio(1, 24),
        "g1(s(0), 0) < g1(0, 0) = 32343/786432 < 1/24",
    ));

    // the t = 1 slice
    let g1_s1 = case.g1.fix_y(&rat(1)).scale(&rat(786432));
    let g2_s1 = case.g2.fix_y(&rat(1)).scale(&rat(786432));
    checks.push(Check::new(
        "case1.slice_t1_display",
        g1_s1 == uni_from_t(&[32343, 20462, 14521, 19134])
            && g2_s1 == uni_from_t(&[32383, -14678, -18019, 6462]),
        "g1(s,1), g2(s,1) times 786432 vs displayed cubics",
    ));
    let sum_1_10 = sum.eval(&ratio(1, 10), &rat(1));
    checks.push(exact_eq_check("case1.sum_at_1_10_t1", &sum_1_10, "8161877/98304000"));
    checks.push(Check::new(
        "case1.sum_at_1_10_t1_below_target",
        sum_1_10 < ratio(1, 12),
        "forces s(1) > 1/10",
    ));
    let g1_1_10 = case.g1.eval(&ratio(1, 10), &rat(1));
    checks.push(exact_eq_check("case1.g1_at_1_10_t1", &g1_1_10, "1439731/32768000"));
    checks.push(Check::new(
        "case1.g1_at_1_10_t1_above_target",
        g1_1_10 > ratio(1, 24),
        "g1(1/10, 1) > 1/24",
    ));
    let dg1_s1 = case.g1.fix_y(&rat(1)).derivative().scale(&rat(786432));
    checks.push(Check::new(
        "case1.g1_increasing_on_t1_slice",
        dg1_s1 == uni_from_t(&[20462, 29042, 57402])
            && dg1_s1.sign_on_interval(&rat(0), &rat(1)) == Some(1),
        "displayed quadratic with no roots in [0, 1] and positive values",
    ));
    Ok(checks)
}

fn verify_case2_facts(case: &ExceptionalCase) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let sum = case.g1.add(&case.g2);
    let dsum = sum.d_dx();

    // 40000 * d/ds (g1+g2) = f3(t) s^3 + a2(t) s^2 + b(t) s + c(t)
    let displayed = bi_from_int_coeffs(&[
        ((3, 3), -288),
        ((3, 2), 732),
        ((3, 1), -708),
        ((3, 0), 330),
        ((2, 3), -864),
        ((2, 2), -4008),
        ((2, 1), 5952),
        ((2, 0), -3375),
        ((1, 2), -32),
        ((1, 1), 3506),
        ((1, 0), -883),
        ((0, 1), -2211),
        ((0, 0), 311),
    ]);
    checks.push(Check::new(
        "case2.derivative_display",
        dsum.scale(&rat(40000)) == displayed,
        "40000 * d/ds(g1+g2) vs displayed cubic in s",
    ));

    let f3 = uni_from_t(&[330, -708, 732, -288]);
    let a2 = uni_from_t(&[-3375, 5952, -4008, -864]);
    let b_t = uni_from_t(&[-883, 3506, -32]);
    let c_t = uni_from_t(&[311, -2211]);

    // leading coefficient: unique real root, located right of the domain
    let disc_f3 = cubic_discriminant(-288, 732, -708, 330);
    checks.push(Check::new(
        "case2.f3_cubic_discriminant_negative",
        disc_f3.is_negative(),
        format!("discriminant {} < 0, so f3 has a unique real root", disc_f3),
    ));
    let f3_at_1 = f3.eval(&rat(1)) / rat(40000);
    checks.push(Check::new(
        "case2.f3_at_1_display",
        f3_at_1 == ratio(33, 40000),
        format!(
            "exact f3(1) = {} = 33/20000; the displayed 33/40000 does not reproduce \
             (the sign claim is unaffected)",
            rat_to_string(&f3_at_1)
        ),
    ));
    checks.push(Check::new(
        "case2.f3_at_1_positive",
        f3_at_1.is_positive(),
        "f3(1) > 0",
    ));
    checks.push(exact_eq_check(
        "case2.f3_at_2",
        &(f3.eval(&rat(2)) / rat(40000)),
        "-231/20000",
    ));
    checks.push(Check::new(
        "case2.f3_positive_on_domain",
        f3.sign_on_interval(&case.t_domain.0, &rat(1)) == Some(1),
        "f3 has no root in [3/20, 1] and is positive there (its only real \
         root lies in (1, 2))",
    ));

    // the displayed merged quadratic bound and its discriminant
    let a_paper = uni_from_t(&[-3375, 5244, -2946, -1152]);
    let merged = f3.add(&a2);
    checks.push(Check::new(
        "case2.merged_bound_display",
        a_paper == merged,
        format!(
            "displayed s^2 coefficient {} differs from the direct merge \
             f3 + a2 = {}; the difference is 330(t^2 - 1). The displayed \
             version is NOT an upper bound for the derivative on all of \
             [0,1] x [3/20,1]; the conclusion is certified below with the \
             direct merge.",
            fmt_poly(&a_paper),
            fmt_poly(&merged)
        ),
    ));
    let disc_paper = b_t.mul(&b_t).sub(&a_paper.mul(&c_t).scale(&rat(4)));
    checks.push(Check::new(
        "case2.discriminant_display",
        disc_paper
            == uni_from_t(&[4978189, -42563632, 62391308, -24845720, -10187264]),
        "discriminant of the displayed quadratic vs displayed quartic",
    ));
    let d_3_20 = disc_paper.eval(&ratio(3, 20));
    checks.push(Check::new(
        "case2.discriminant_at_3_20_display",
        d_3_20 == rat(-91563),
        format!(
            "exact D(3/20) = {} (about -91562.98); the displayed integer -91563 \
             is its rounding and does not reproduce exactly",
            rat_to_string(&d_3_20)
        ),
    ));
    checks.push(Check::new(
        "case2.discriminant_at_3_20_negative",
        d_3_20.is_negative(),
        format!("exact D(3/20) = {}", rat_to_string(&d_3_20)),
    ));
    let ddisc = disc_paper.derivative();
    checks.push(Check::new(
        "case2.discriminant_derivative_display",
        ddisc == uni_from_t(&[-42563632, 124782616, -74537160, -40749056]),
        "D'(t) vs displayed cubic",
    ));
    let disc_dd = cubic_discriminant(-40749056, -74537160, 124782616, -42563632);
    checks.push(Check::new(
        "case2.discriminant_monotone_on_domain",
        disc_dd.is_negative()
            && ddisc.eval(&rat(-3)).is_positive()
            && ddisc.eval(&rat(0)).is_negative(),
        "D' has a unique real root, located in (-3, 0); D falls on [3/20, 1]",
    ));
    checks.push(Check::new(
        "case2.displayed_discriminant_negative_on_domain",
        disc_paper.sign_on_interval(&case.t_domain.0, &rat(1)) == Some(-1),
        "root-exclusion check that the displayed D < 0 on [3/20, 1]",
    ));

    // the corrected chain: with f3 > 0 and s in [0, 1], f3 s^3 <= f3 s^2, so
    // the derivative is at most (f3 + a2) s^2 + b s + c; that quadratic is
    // negative on the domain because c < 0 and its discriminant is negative
    let disc_merged = b_t.mul(&b_t).sub(&merged.mul(&c_t).scale(&rat(4)));
    let merged_ok = c_t.eval(&case.t_domain.0).is_negative()
        && c_t.eval(&rat(1)).is_negative()
        && disc_merged.sign_on_interval(&case.t_domain.0, &rat(1)) == Some(-1);
    checks.push(Check::new(
        "case2.derivative_negative_certified",
        merged_ok,
        "c(t) < 0 on [3/20, 1] (linear) and the direct-merge discriminant \
         has no roots there, so g1 + g2 strictly falls in s on the domain",
    ));

    // endpoints of the inner bisection
    let sum_s0 = sum.fix_x(&rat(0));
    checks.push(Check::new(
        "case2.sum_at_s0",
        sum_s0.degree().is_none_or(|d| d == 0)
            && sum_s0.eval(&rat(0)) == ratio(46501, 480000)
            && sum_s0.eval(&rat(0)) > ratio(1, 12),
        "g1(0,t) + g2(0,t) = 46501/480000 > 1/12, independent of t",
    ));
    let sum_s1 = sum.fix_x(&rat(1)).scale(&rat(960000));
    checks.push(Check::new(
        "case2.sum_at_s1_display",
        sum_s1 == uni_from_t(&[64850, 32376, -28056, -8640]),
        "960000 (g1(1,t) + g2(1,t)) vs displayed cubic",
    ));
    // drop the cubic term (non-positive on t >= 0), then complete the square
    let quad_part = uni_from_t(&[64850, 32376, -28056]).scale(&ratio(1, 960000));
    let completed_ok = {
        let peak = ratio(10841057, 140280000);
        let centre = ratio(1349, 2338);
        let coeff = ratio(1169, 40000);
        // peak - coeff (t - centre)^2 as a polynomial
        let t2 = UniPoly::new(vec![
            &peak - &coeff * &centre * &centre,
            rat(2) * &coeff * &centre,
            -coeff.clone(),
        ]);
        t2 == quad_part && peak < ratio(1, 12)
    };
    checks.push(Check::new(
        "case2.sum_at_s1_below_target",
        completed_ok,
        "the quadratic part peaks at 10841057/140280000 < 1/12 and the cubic \
         term only lowers it on [0, 1]",
    ));

    // the t = 3/20 slice
    let t0 = ratio(3, 20);
    let g1_slice = case.g1.fix_y(&t0).scale(&rat(480000000));
    let g2_slice = case.g2.fix_y(&t0).scale(&rat(480000000));
    checks.push(Check::new(
        "case2.slice_t_3_20_display",
        g1_slice == uni_from_t(&[25186500, -18802600, 10900000, -9153522, 358947])
            && g2_slice == uni_from_t(&[21314500, 18554800, -13046920, -1147662, 358947]),
        "g1(s, 3/20), g2(s, 3/20) times 480000000 vs displayed quartics",
    ));
    let sum_7_10 = sum.eval(&ratio(7, 10), &t0);
    checks.push(exact_eq_check(
        "case2.sum_at_7_10_t_3_20",
        &sum_7_10,
        "209573047187/2400000000000",
    ));
    checks.push(Check::new(
        "case2.sum_at_7_10_above_target",
        sum_7_10 > ratio(1, 12),
        "forces s(3/20) > 7/10 since the sum falls in s",
    ));
    let g1_7_10 = case.g1.eval(&ratio(7, 10), &t0);
    checks.push(exact_eq_check(
        "case2.g1_at_7_10_t_3_20",
        &g1_7_10,
        "47707350429/1600000000000",
    ));
    checks.push(Check::new(
        "case2.g1_at_7_10_below_target",
        g1_7_10 < ratio(1, 24),
        "g1(7/10, 3/20) < 1/24",
    ));
    let dg1 = case.g1.fix_y(&t0).derivative().scale(&rat(480000000));
    checks.push(Check::new(
        "case2.dg1_t_3_20_display",
        dg1 == uni_from_t(&[-18802600, 21800000, -27460566, 1435788]),
        "480000000 d/ds g1(s, 3/20) vs displayed cubic",
    ));
    let dg1_bound = uni_from_t(&[-18802600, 21800000, -26024778]);
    let bound_disc = rat(21800000) * rat(21800000)
        - rat(4) * rat(-26024778) * rat(-18802600);
    checks.push(Check::new(
        "case2.g1_decreasing_on_t_3_20_slice",
        dg1_bound.eval(&rat(0)).is_negative() && bound_disc.is_negative(),
        "merging the cubic term with s^3 <= s^2 leaves a quadratic that is \
         negative at 0 with negative discriminant; g1(., 3/20) falls, so \
         h(3/20) <= g1(7/10, 3/20) < 1/24",
    ));

    // the t = 1 slice
    let g1_s1 = case.g1.fix_y(&rat(1)).scale(&rat(960000));
    let g2_s1 = case.g2.fix_y(&rat(1)).scale(&rat(960000));
    checks.push(Check::new(
        "case2.slice_t1_display",
        g1_s1 == uni_from_t(&[50373, 13252, 6602, -9900, 198])
            && g2_s1 == uni_from_t(&[42629, -58852, 24490, -8460, 198]),
        "g1(s, 1), g2(s, 1) times 960000 vs displayed quartics",
    ));
    let sum_2_5 = sum.eval(&ratio(2, 5), &rat(1));
    checks.push(exact_eq_check("case2.sum_at_2_5_t1", &sum_2_5, "24553693/300000000"));
    checks.push(Check::new(
        "case2.sum_at_2_5_below_target",
        sum_2_5 < ratio(1, 12),
        "forces s(1) < 2/5",
    ));
    let dg1_s1 = case.g1.fix_y(&rat(1)).derivative().scale(&rat(960000));
    checks.push(Check::new(
        "case2.dg1_t1_display",
        dg1_s1 == uni_from_t(&[13252, 13204, -29700, 792]),
        "960000 d/ds g1(s, 1) vs displayed cubic",
    ));
    // for positivity on [0, 2/5] the cubic term is dropped (it is
    // non-negative), leaving a concave quadratic positive at both ends
    let lower = uni_from_t(&[13252, 13204, -29700]);
    checks.push(Check::new(
        "case2.g1_increasing_on_t1_slice",
        lower.sign_on_interval(&rat(0), &ratio(2, 5)) == Some(1),
        "792 s^3 >= 0 bounds the derivative below by a quadratic positive on \
         [0, 2/5]; g1(., 1) rises, so h(1) >= g1(0, 1) = 16791/320000 > 1/24",
    ));
    checks.push(Check::new(
        "case2.g1_at_0_t1_above_target",
        case.g1.eval(&rat(0), &rat(1)) == ratio(16791, 320000)
            && ratio(16791, 320000) > ratio(1, 24),
        "g1(0, 1) = 16791/320000 > 1/24",
    ));
    Ok(checks)
}

fn fmt_poly(p: &UniPoly) -> String {
    let parts: Vec<String> = p
        .coeffs()
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| format!("{}t^{i}", rat_to_string(c)))
        .collect();
    parts.join(" + ")
}

fn pow(x: &Rat, e: u32) -> Rat {
    let mut acc = rat(1);
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// Discriminant of `a t^3 + b t^2 + c t + d`.
fn cubic_discriminant(a: i64, b: i64, c: i64, d: i64) -> Rat {
    let (a, b, c, d) = (rat(a), rat(b), rat(c), rat(d));
    rat(18) * &a * &b * &c * &d - rat(4) * &b * &b * &b * &d + &b * &b * &c * &c
        - rat(4) * &a * &c * &c * &c
        - rat(27) * &a * &a * &d * &d
}

/// The solved parameter point: dyadic enclosures for the outer and inner
/// bisection together with the exact residuals at the midpoint.
#[derive(Clone, Debug, Serialize)]
pub struct SolvedWitness {
    pub case_id: usize,
    #[serde(with = "crate::rat::rat_string")]
    pub t_lo: Rat,
    #[serde(with = "crate::rat::rat_string")]
    pub t_hi: Rat,
    #[serde(with = "crate::rat::rat_string")]
    pub s_lo: Rat,
    #[serde(with = "crate::rat::rat_string")]
    pub s_hi: Rat,
    #[serde(with = "crate::rat::rat_string")]
    pub t_mid: Rat,
    #[serde(with = "crate::rat::rat_string")]
    pub s_mid: Rat,
    /// `|g1(s_mid, t_mid) - 1/24|`, exact.
    #[serde(with = "crate::rat::rat_string")]
    pub residual_g1: Rat,
    #[serde(with = "crate::rat::rat_string")]
    pub residual_g2: Rat,
    /// Upper bound on |d(target) - 1/24| drift per unit parameter move,
    /// from the coefficient sums of g1 and g2 on the unit square.
    #[serde(with = "crate::rat::rat_string")]
    pub lipschitz_bound: Rat,
    #[serde(skip)]
    pub permuton: StepPermuton,
}

/// Direction of the inner crossing: the sum is increasing in `s` for the
/// first case and decreasing for the second.
fn sum_increases(case: &ExceptionalCase) -> bool {
    case.id == CaseId::Case1
}

const OUTER_BITS: u32 = 48;
const INNER_BITS: u32 = 72;

/// Finds the parameter point of the case by nested bisection. All sign
/// decisions are exact evaluations of rational polynomials at dyadic
/// rationals; the outer enclosure is certified by opposite signs of
/// `g1(s(t), t) - 1/24` at its ends.
pub fn solve_case(case: &ExceptionalCase) -> Result<SolvedWitness> {
    let target_sum = ratio(1, 12);
    let target = ratio(1, 24);
    let increasing = sum_increases(case);
    let sum = case.g1.add(&case.g2);

    // sign of g1(s(t), t) - target at the unique root s(t) of the sum
    let sign_at = |t: &Rat| -> Result<i8> {
        let s_poly = sum.fix_y(t).sub(&UniPoly::new(vec![target_sum.clone()]));
        let r_poly = case.g1.fix_y(t).sub(&UniPoly::new(vec![target.clone()]));
        let (mut lo, mut hi) = (rat(0), rat(1));
        let (vlo, vhi) = (s_poly.eval(&lo), s_poly.eval(&hi));
        let expect_lo_neg = increasing;
        if vlo.is_zero() || vhi.is_zero() {
            return Err(Error::EndpointSign("sum hits 1/12 exactly at a grid end".into()));
        }
        if (vlo.is_negative() != expect_lo_neg) || (vhi.is_negative() == expect_lo_neg) {
            return Err(Error::EndpointSign(format!(
                "inner bracket at t = {} has signs {} / {}",
                rat_to_string(t),
                vlo,
                vhi
            )));
        }
        for _ in 0..512 {
            let rlo = r_poly.eval(&lo);
            let rhi = r_poly.eval(&hi);
            if !rlo.is_zero() && !rhi.is_zero() {
                let slo: i8 = if rlo.is_positive() { 1 } else { -1 };
                let shi: i8 = if rhi.is_positive() { 1 } else { -1 };
                if slo == shi && r_poly.count_roots_between(&lo, &hi) == 0 {
                    return Ok(slo);
                }
            }
            let mid = (&lo + &hi) / rat(2);
            let v = s_poly.eval(&mid);
            if v.is_zero() {
                // the crossing is exactly rational; sign directly at it
                let rv = r_poly.eval(&mid);
                return Ok(if rv.is_zero() {
                    0
                } else if rv.is_positive() {
                    1
                } else {
                    -1
                });
            }
            if v.is_negative() == expect_lo_neg {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::Other("inner sign determination did not separate".into()))
    };

    let (mut t_lo, mut t_hi) = case.t_domain.clone();
    let s_lo_sign = sign_at(&t_lo)?;
    let s_hi_sign = sign_at(&t_hi)?;
    if s_lo_sign >= 0 || s_hi_sign <= 0 {
        return Err(Error::EndpointSign(format!(
            "outer endpoints have signs {s_lo_sign} / {s_hi_sign}, expected - / +"
        )));
    }
    let width_target = Rat::new(BigInt::one(), BigInt::one() << (OUTER_BITS as usize));
    while &t_hi - &t_lo > width_target {
        let mid = (&t_lo + &t_hi) / rat(2);
        match sign_at(&mid)? {
            0 => {
                // exact rational solution; collapse the enclosure
                t_lo = mid.clone();
                t_hi = mid;
                break;
            }
            s if s < 0 => t_lo = mid,
            _ => t_hi = mid,
        }
    }

    let t_mid = (&t_lo + &t_hi) / rat(2);
    // final inner enclosure at the midpoint
    let s_poly = sum.fix_y(&t_mid).sub(&UniPoly::new(vec![target_sum.clone()]));
    let (mut s_lo, mut s_hi) = (rat(0), rat(1));
    let expect_lo_neg = increasing;
    for _ in 0..INNER_BITS {
        let mid = (&s_lo + &s_hi) / rat(2);
        let v = s_poly.eval(&mid);
        if v.is_zero() {
            s_lo = mid.clone();
            s_hi = mid;
            break;
        }
        if v.is_negative() == expect_lo_neg {
            s_lo = mid;
        } else {
            s_hi = mid;
        }
    }
    let s_mid = (&s_lo + &s_hi) / rat(2);

    let residual_g1 = (case.g1.eval(&s_mid, &t_mid) - &target).abs();
    let residual_g2 = (case.g2.eval(&s_mid, &t_mid) - &target).abs();

    // coefficient-sum Lipschitz bound on the unit square
    let lipschitz_bound: Rat = case
        .g1
        .terms()
        .chain(case.g2.terms())
        .map(|(&(i, j), c)| c.abs() * rat((i + j) as i64))
        .sum();

    let x = &s_mid * &t_mid;
    let y = &s_mid * (rat(1) - &t_mid);
    let z = rat(1) - &s_mid;
    let permuton = StepPermuton::mixture(&case.perms, &[x, y, z])?;

    Ok(SolvedWitness {
        case_id: case.id.index(),
        t_lo,
        t_hi,
        s_lo,
        s_hi,
        t_mid,
        s_mid,
        residual_g1,
        residual_g2,
        lipschitz_bound,
        permuton,
    })
}

/// The emitted witness: the permuton at the solved point, the exact
/// densities of the four target patterns, and a non-uniformity certificate.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessBundle {
    pub case_id: usize,
    pub k: usize,
    pub patterns: Vec<String>,
    /// Exact densities of the four quadruple patterns at the midpoint.
    pub densities: Vec<String>,
    /// A grid cell whose mass differs from the uniform `1/k^2`.
    pub nonuniform_cell: (usize, usize),
    #[serde(with = "crate::rat::rat_string")]
    pub nonuniform_mass: Rat,
    pub enclosure_note: String,
    #[serde(skip)]
    pub permuton: StepPermuton,
}

/// Packages the solved witness. Exact equality of the densities with the
/// uniform value holds only at the true (irrational) parameter point; the
/// bundle carries the dyadic enclosure and the midpoint residuals instead.
pub fn emit_witness(case: &ExceptionalCase, solved: &SolvedWitness) -> Result<WitnessBundle> {
    let x = &solved.s_mid * &solved.t_mid;
    let y = &solved.s_mid * (rat(1) - &solved.t_mid);
    let z = rat(1) - &solved.s_mid;
    let densities: Vec<String> = case
        .d_polys
        .iter()
        .map(|(_, d)| rat_to_string(&d.eval(&x, &y, &z)))
        .collect();
    let k = case.k;
    let uniform = Rat::new(BigInt::one(), BigInt::from(k as u64 * k as u64));
    let mut cell = None;
    'outer: for r in 0..k {
        for c in 0..k {
            let mass = solved.permuton.matrix().get(r, c) / rat(k as i64);
            if mass != uniform {
                cell = Some(((r, c), mass));
                break 'outer;
            }
        }
    }
    let ((r, c), mass) = cell.ok_or_else(|| Error::Other("permuton is uniform".into()))?;
    Ok(WitnessBundle {
        case_id: case.id.index(),
        k,
        patterns: case.quadruple.iter().map(ToString::to_string).collect(),
        densities,
        nonuniform_cell: (r, c),
        nonuniform_mass: mass,
        enclosure_note: format!(
            "exact equality with 1/24 holds at the true parameter point inside \
             t in [{}, {}]; the midpoint densities above are exact rationals",
            rat_to_string(&solved.t_lo),
            rat_to_string(&solved.t_hi)
        ),
        permuton: solved.permuton.clone(),
    })
}
