//! Exact certificate that a limit of geometric linear sections of
//! `Gr(2,4)` need not be geometric.

use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::json;

use super::grassmann::decomposable_rank;
use super::kvector::{binomial, KVector};
use super::sections::{hyperplane_section, section_intersection, LinearSection};
use super::MultilinearError;
use crate::linalg::{kernel_by_elimination, rref, Mat};
use crate::scalar::{format_rational, Rational, Scalar};

/// Sample values of `n` for the sequence `S_n`.
pub const SAMPLE_N: [i64; 4] = [2, 3, 5, 10];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub step: String,
    pub description: String,
    pub passed: bool,
    pub details: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub status: String,
    pub failed_step: Option<String>,
    pub steps: Vec<StepReport>,
}

impl CounterexampleReport {
    pub fn verified(&self) -> bool {
        self.status == "verified"
    }
}

type Q = Rational;
type KV = KVector<Q>;

fn q(a: i64, b: i64) -> Q {
    Q::from_ratio(a, b)
}

fn e(idx: &[usize]) -> KV {
    KVector::basis(4, &idx.iter().map(|i| i - 1).collect::<Vec<_>>())
}

fn sum(terms: &[(Q, KV)]) -> KV {
    let k = terms.first().map_or(2, |(_, v)| v.degree());
    terms
        .iter()
        .fold(KVector::zero(k, 4), |acc, (c, v)| acc.add(&v.scale(c)).expect("same shape"))
}

fn omega_n(h: &Q) -> KV {
    let a = e(&[1]).add(&e(&[3]).scale(h)).expect("same shape");
    let b = e(&[2]).add(&e(&[4]).scale(h)).expect("same shape");
    a.wedge(&b).expect("degree 2")
}

fn span(vs: &[KV]) -> LinearSection<Q> {
    LinearSection::from_kvectors(2, 4, vs, true).expect("ambient shape")
}

fn expected_sn(h: &Q) -> Vec<KV> {
    vec![
        e(&[1, 3]),
        e(&[2, 4]),
        sum(&[(q(1, 1), e(&[1, 4])), (q(1, 1), e(&[2, 3]))]),
        sum(&[(q(1, 1), e(&[1, 2])), (h.clone(), e(&[1, 4]))]),
    ]
}

fn expected_s() -> Vec<KV> {
    vec![e(&[1, 2]), e(&[1, 3]), e(&[2, 4]), sum(&[(q(1, 1), e(&[1, 4])), (q(1, 1), e(&[2, 3]))])]
}

fn top(v: &KV) -> Q {
    v.coefficients()[0].clone()
}

/// Gram matrix of the pairing `(u, v) -> u ^ v` on a list of 2-forms.
fn wedge_gram(basis: &[KV]) -> Result<Mat<Q>, MultilinearError> {
    let n = basis.len();
    let mut g = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = top(&basis[i].wedge(&basis[j])?);
        }
    }
    Ok(g)
}

/// Coefficients of `(omega ^ omega) / 2` as a quadratic polynomial in the
/// coordinates of `omega` over `basis`, keyed by monomial.
fn quadric(basis: &[KV], names: &[&str]) -> Result<Vec<(String, Q)>, MultilinearError> {
    let g = wedge_gram(basis)?;
    let mut out = Vec::new();
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let c = if i == j { g[(i, i)].clone() / q(2, 1) } else { g[(i, j)].clone() };
            if !c.is_zero() {
                out.push((format!("{}{}", names[i], names[j]), c));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn render_quadric(p: &[(String, Q)]) -> serde_json::Value {
    json!(p.iter().map(|(m, c)| (m.clone(), json!(format_rational(c)))).collect::<serde_json::Map<_, _>>())
}

fn render(vs: &[Vec<Q>]) -> serde_json::Value {
    json!(vs
        .iter()
        .map(|v| v.iter().map(format_rational).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

/// Whether a symmetric matrix is positive or negative semidefinite.
fn is_semidefinite(g: &Mat<Q>) -> bool {
    let mut a = g.clone();
    let mut active: Vec<usize> = (0..a.rows()).collect();
    let mut signs = Vec::new();
    while !active.is_empty() {
        let Some(pos) = active.iter().position(|&i| !a[(i, i)].is_zero()) else {
            return active.iter().all(|&i| active.iter().all(|&j| a[(i, j)].is_zero()));
        };
        let p = active.remove(pos);
        let piv = a[(p, p)].clone();
        signs.push(piv.is_positive());
        for &i in &active {
            let f = a[(i, p)].clone() / piv.clone();
            for &j in &active {
                let v = a[(i, j)].clone() - f.clone() * a[(p, j)].clone();
                a[(i, j)] = v;
            }
        }
    }
    signs.iter().all(|&s| s) || signs.iter().all(|&s| !s)
}

/// Lagrange interpolation of `(x_i, y_i)` evaluated at `x`.
fn interpolate(xs: &[Q], ys: &[Q], x: &Q) -> Q {
    let mut total = Q::zero();
    for i in 0..xs.len() {
        let mut term = ys[i].clone();
        for j in 0..xs.len() {
            if i != j {
                term = term * (x.clone() - xs[j].clone()) / (xs[i].clone() - xs[j].clone());
            }
        }
        total += term;
    }
    total
}

fn rref_basis(s: &LinearSection<Q>) -> (Vec<Vec<Q>>, Vec<usize>) {
    let (r, pivots) = rref(&Mat::from_rows(s.basis()));
    ((0..pivots.len()).map(|i| r.row(i).to_vec()).collect(), pivots)
}

fn step(id: &str, description: &str, passed: bool, details: serde_json::Value) -> StepReport {
    StepReport {
        step: id.into(),
        description: description.into(),
        passed,
        details,
    }
}

fn step_a() -> Result<(StepReport, Vec<LinearSection<Q>>), MultilinearError> {
    let eta = e(&[1, 2]);
    let h_eta = hyperplane_section(&eta)?;
    let h_eta_ok = h_eta.same_subspace(&span(&[e(&[1, 2]), e(&[1, 3]), e(&[1, 4]), e(&[2, 3]), e(&[2, 4])]));
    let mut ok = h_eta_ok && h_eta.is_geometric();
    let mut per_n = Vec::new();
    let mut sections = Vec::new();
    for n in SAMPLE_N {
        let h = q(1, n);
        let w = omega_n(&h);
        let h_w = hyperplane_section(&w)?;
        let expected_hw = span(&[
            e(&[1, 3]),
            e(&[2, 4]),
            sum(&[(q(1, 1), e(&[1, 2])), (-(h.clone() * h.clone()), e(&[3, 4]))]),
            sum(&[(q(1, 1), e(&[1, 4])), (q(1, 1), e(&[2, 3]))]),
            sum(&[(q(1, 1), e(&[1, 4])), (h.clone(), e(&[3, 4]))]),
        ]);
        let s_n = section_intersection(&[h_eta.clone(), h_w.clone()])?;
        let hw_ok = h_w.same_subspace(&expected_hw) && h_w.is_geometric();
        let sn_ok = s_n.same_subspace(&span(&expected_sn(&h))) && s_n.is_geometric();
        ok &= hw_ok && sn_ok;
        per_n.push(json!({
            "n": n,
            "h_omega_matches": hw_ok,
            "s_n_matches": sn_ok,
            "s_n_dim": s_n.dim(),
            "s_n_basis": render(&rref_basis(&s_n).0),
        }));
        sections.push(s_n);
    }
    let report = step(
        "a",
        "hyperplane sections H_eta, H_omega_n and S_n = H_eta ∩ H_omega_n",
        ok,
        json!({"h_eta_matches": h_eta_ok, "per_n": per_n}),
    );
    Ok((report, sections))
}

fn step_b() -> Result<StepReport, MultilinearError> {
    let names = ["a", "b", "c", "d"];
    let mut ok = true;
    let mut per_n = Vec::new();
    for n in SAMPLE_N {
        let h = q(1, n);
        let b = expected_sn(&h);
        let basis = [b[3].clone(), b[0].clone(), b[1].clone(), b[2].clone()];
        let p = quadric(&basis, &names)?;
        let mut expected = vec![("ad".to_string(), h.clone()), ("bc".to_string(), q(-1, 1)), ("dd".to_string(), q(1, 1))];
        expected.sort();
        ok &= p == expected;
        per_n.push(json!({"n": n, "quadric": render_quadric(&p)}));
    }
    Ok(step(
        "b",
        "decomposable locus of S_n is d^2 + a d/n - b c = 0",
        ok,
        json!({ "per_n": per_n }),
    ))
}

fn step_c(sections: &[LinearSection<Q>]) -> Result<(StepReport, LinearSection<Q>), MultilinearError> {
    let hs: Vec<Q> = SAMPLE_N.iter().map(|&n| q(1, n)).collect();
    let bases: Vec<(Vec<Vec<Q>>, Vec<usize>)> = sections.iter().map(rref_basis).collect();
    let pivots_stable = bases.iter().all(|(_, p)| *p == bases[0].1);
    let rows = bases[0].0.len();
    let width = binomial(4, 2);
    let mut limit = vec![vec![Q::zero(); width]; rows];
    let mut polynomial = pivots_stable;
    if pivots_stable {
        for r in 0..rows {
            for c in 0..width {
                let ys: Vec<Q> = bases.iter().map(|(b, _)| b[r][c].clone()).collect();
                // The entries are polynomial in 1/n of degree at most 2 when
                // three samples already predict the fourth.
                polynomial &= interpolate(&hs[..3], &ys[..3], &hs[3]) == ys[3];
                limit[r][c] = interpolate(&hs, &ys, &Q::zero());
            }
        }
    }
    let s = LinearSection::from_span(2, 4, &limit, false)?;
    let dim_ok = s.dim() == rows;
    let matches = s.same_subspace(&span(&expected_s()));
    let p = quadric(&expected_s(), &["a", "b", "c", "d"])?;
    let quadric_ok = p == vec![("bc".to_string(), q(-1, 1)), ("dd".to_string(), q(1, 1))];
    let ok = pivots_stable && polynomial && dim_ok && matches && quadric_ok;
    let report = step(
        "c",
        "limit S = span<e12, e13, e24, e14+e23> with decomposable locus d^2 - b c = 0",
        ok,
        json!({
            "pivot_structure_constant": pivots_stable,
            "entries_polynomial_in_1_over_n": polynomial,
            "limit_basis": render(&limit),
            "matches": matches,
            "quadric": render_quadric(&p),
        }),
    );
    Ok((report, s))
}

fn step_d(s: &LinearSection<Q>) -> Result<(StepReport, Vec<KV>), MultilinearError> {
    let generators = vec![
        e(&[1, 2]),
        e(&[1, 3]),
        e(&[2, 4]),
        sum(&[(q(1, 1), e(&[1])), (q(1, 1), e(&[2]))]).wedge(&sum(&[(q(1, 1), e(&[3])), (q(1, 1), e(&[4]))]))?,
    ];
    let spans_s = span(&generators).same_subspace(s);
    let decomposable = generators.iter().all(|g| decomposable_rank(g).map(|r| r.is_decomposable()).unwrap_or(false));
    // Linear annihilator: omega with omega ^ delta = 0 for every generator.
    let rows: Vec<Vec<Q>> = generators
        .iter()
        .map(|g| g.wedge_matrix(2).map(|m| m.row(0).to_vec()))
        .collect::<Result<_, _>>()?;
    let ann: Vec<KV> = kernel_by_elimination(&Mat::from_rows(&rows))
        .into_iter()
        .map(|v| KVector::from_coefficients(2, 4, v).expect("ambient shape"))
        .collect();
    let g = wedge_gram(&ann)?;
    let semidefinite = is_semidefinite(&g);
    let locus: Vec<KV> = kernel_by_elimination(&g)
        .into_iter()
        .map(|c| {
            c.iter()
                .zip(&ann)
                .fold(KVector::zero(2, 4), |acc, (x, v)| acc.add(&v.scale(x)).expect("same shape"))
        })
        .collect();
    let multiples_of_e12 = locus.len() == 1 && span(&locus).same_subspace(&span(&[e(&[1, 2])]));
    let ok = spans_s && decomposable && semidefinite && multiples_of_e12;
    let report = step(
        "d",
        "decomposable 2-forms vanishing against the generators of D are multiples of e12",
        ok,
        json!({
            "generators_span_s": spans_s,
            "generators_decomposable": decomposable,
            "linear_annihilator": render(&ann.iter().map(|v| v.coefficients().to_vec()).collect::<Vec<_>>()),
            "restricted_form_semidefinite": semidefinite,
            "decomposable_annihilator": render(&locus.iter().map(|v| v.coefficients().to_vec()).collect::<Vec<_>>()),
        }),
    );
    Ok((report, locus))
}

fn step_e(s: &LinearSection<Q>, locus: &[KV]) -> Result<StepReport, MultilinearError> {
    // Every geometric hyperplane containing D is H_omega for omega in the
    // decomposable annihilator, so the smallest geometric section
    // containing D is the intersection of those hyperplanes.
    let hyperplanes = locus.iter().map(hyperplane_section).collect::<Result<Vec<_>, _>>()?;
    let hull = section_intersection(&hyperplanes)?;
    let hull_is_h_e12 = hull.same_subspace(&hyperplane_section(&e(&[1, 2]))?);
    let witness = e(&[1, 4]);
    let witness_ok = hull.contains(&witness) && !s.contains(&witness) && decomposable_rank(&witness)?.is_decomposable();
    let ok = hull_is_h_e12 && hull.dim() == 5 && s.dim() == 4 && witness_ok;
    Ok(step(
        "e",
        "D is not a geometric linear section, so geometric sections are not closed",
        ok,
        json!({
            "geometric_hull_dim": hull.dim(),
            "geometric_hull_is_h_e12": hull_is_h_e12,
            "limit_dim": s.dim(),
            "witness": "e14",
            "witness_in_hull_not_in_limit": witness_ok,
        }),
    ))
}

/// Runs the five certification steps in exact rational arithmetic.
pub fn verify_counterexample() -> CounterexampleReport {
    let run = || -> Result<Vec<StepReport>, MultilinearError> {
        let (a, sections) = step_a()?;
        let b = step_b()?;
        let (c, s) = step_c(&sections)?;
        let (d, locus) = step_d(&s)?;
        let e = step_e(&s, &locus)?;
        Ok(vec![a, b, c, d, e])
    };
    match run() {
        Ok(steps) => {
            let failed_step = steps.iter().find(|s| !s.passed).map(|s| s.step.clone());
            CounterexampleReport {
                status: if failed_step.is_none() { "verified" } else { "failed" }.into(),
                failed_step,
                steps,
            }
        }
        Err(err) => CounterexampleReport {
            status: "failed".into(),
            failed_step: Some("error".into()),
            steps: vec![step("error", &err.to_string(), false, serde_json::Value::Null)],
        },
    }
}
