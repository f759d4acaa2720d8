//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::{Duration, Instant};

use chernlab::euler::{euler_char, smillie, SpaceExpr};
use chernlab::geometry::{gauss_bonnet, geodesic, para_structure_check, pfaffian, Geometry, STEPS_PER_UNIT};
use chernlab::liftgroup::{lift_mul, CoveredElement, Mat2};
use chernlab::milnor::{
    build_representation, milnor_number, milnor_number_by_winding, relator_lift, seed_alpha0, seed_alpha1,
    ConjClassTag, SurfaceGroupRep, SEED_A0, SEED_A1, SEED_A2,
};
use chernlab::spectral::pages::positions;
use chernlab::spectral::{infinity_page, page, FilteredComplex};
use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPECTRAL_CORPUS: usize = 200;
const DOUBLE_CORPUS: usize = 50;
const CONJUGATED_VARIANTS: usize = 50;
const PFAFFIAN_CASES: usize = 100;
const PFAFFIAN_REL_TOL: f64 = 1e-8;
const WINDING_RESIDUE: f64 = 1e-3;
const GAUSS_BONNET_TOL: f64 = 1e-3;
const MESH_RATIO: f64 = 3.5;
const PARA_SAMPLES: usize = 16;

type Verdict = Result<String, String>;

fn residue(rep: &SurfaceGroupRep) -> Result<f64, String> {
    let lifts = rep
        .a()
        .iter()
        .zip(rep.b())
        .flat_map(|(a, b)| [*a, *b])
        .map(CoveredElement::principal)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let turns = relator_lift(&lifts).map_err(|e| e.to_string())?.lift / TAU;
    Ok((turns - turns.round()).abs())
}

fn milnor_corpus() -> Vec<(usize, i64)> {
    (1..=4usize).flat_map(|g| (1 - g as i64..g as i64).map(move |d| (g, d))).collect()
}

fn realization_table() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (g, d) in milnor_corpus() {
        let rep = build_representation(g, d).map_err(|e| format!("build({g}, {d}): {e}"))?;
        let delta = milnor_number(&rep).map_err(|e| format!("delta({g}, {d}): {e}"))?;
        if delta != d {
            return Err(format!("(g, d) = ({g}, {d}) gave {delta}"));
        }
        worst = worst.max(residue(&rep)?);
    }
    let elapsed = start.elapsed();
    if worst >= WINDING_RESIDUE {
        return Err(format!("residue {worst:.2e}"));
    }
    if elapsed >= Duration::from_secs(5) {
        return Err(format!("took {elapsed:.2?}"));
    }
    Ok(format!("{} pairs, max residue {worst:.1e}, {elapsed:.2?}", milnor_corpus().len()))
}

/// A conjugator in `GL⁺(2,ℝ)` with singular values in `[1/3, 3]`.
fn random_conjugator(rng: &mut ChaCha8Rng) -> Mat2 {
    let (a, b) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
    let s = rng.gen_range(1.0f64..3.0);
    let shear = rng.gen_range(-1.0..1.0);
    let (ca, sa, cb, sb) = (a.cos(), a.sin(), b.cos(), b.sin());
    let r1 = Mat2::new(ca, -sa, sa, ca);
    let r2 = Mat2::new(cb, -sb, sb, cb);
    r1 * Mat2::new(s, shear, 0.0, 1.0 / s) * r2
}

fn full_corpus() -> Result<Vec<SurfaceGroupRep>, String> {
    let base: Vec<SurfaceGroupRep> =
        milnor_corpus().into_iter().map(|(g, d)| build_representation(g, d).map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut all = base.clone();
    for k in 0..CONJUGATED_VARIANTS {
        let s = random_conjugator(&mut rng);
        all.push(base[k % base.len()].conjugate(&s).map_err(|e| e.to_string())?);
    }
    Ok(all)
}

fn dual_methods(corpus: &[SurfaceGroupRep]) -> Verdict {
    for (k, rep) in corpus.iter().enumerate() {
        let a = milnor_number(rep).map_err(|e| format!("case {k}: {e}"))?;
        let b = milnor_number_by_winding(rep).map_err(|e| format!("case {k}: {e}"))?;
        if a != b {
            return Err(format!("case {k}: lift arithmetic {a}, winding {b}"));
        }
    }
    Ok(format!("{} representations agree", corpus.len()))
}

fn inequality(corpus: &[SurfaceGroupRep]) -> Verdict {
    for rep in corpus {
        let d = milnor_number(rep).map_err(|e| e.to_string())?;
        if d.unsigned_abs() + 1 > rep.genus() as u64 {
            return Err(format!("genus {} has degree {d}", rep.genus()));
        }
    }
    Ok(format!("|delta| <= g - 1 on {} representations", corpus.len()))
}

fn seed_matrices() -> Verdict {
    if SEED_A0 * SEED_A1 != SEED_A2 {
        return Err(format!("A0 A1 = {:?}", SEED_A0 * SEED_A1));
    }
    let tag = |m: &Mat2| ConjClassTag::of(m).map(|t| (t.trace, t.det));
    let plus = Some((Ratio::new(5, 2), Ratio::from_integer(1)));
    let minus = Some((Ratio::new(-5, 2), Ratio::from_integer(1)));
    if tag(&SEED_A0) != plus || tag(&SEED_A1) != plus || tag(&SEED_A2) != minus {
        return Err(format!("tags {:?} {:?} {:?}", tag(&SEED_A0), tag(&SEED_A1), tag(&SEED_A2)));
    }
    let product = lift_mul(&seed_alpha0(), &seed_alpha1()).map_err(|e| e.to_string())?;
    if !(product.lift > FRAC_PI_2 && product.lift < 3.0 * FRAC_PI_2) {
        return Err(format!("lift {}", product.lift));
    }
    if product.matrix.distance(&SEED_A2) > 1e-12 {
        return Err("lifted product does not cover A2".into());
    }
    Ok(format!("A0 A1 = A2 exactly, lift of the product {:.6}", product.lift))
}

fn spectral_corpus() -> Vec<FilteredComplex> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..SPECTRAL_CORPUS).map(|_| common::random_filtered_complex(&mut rng).complex).collect()
}

fn convergence(corpus: &[FilteredComplex]) -> Verdict {
    let start = Instant::now();
    let mut entries = 0;
    for (k, c) in corpus.iter().enumerate() {
        let inf = infinity_page(c).map_err(|e| format!("complex {k}: {e}"))?;
        for (p, q) in positions(c) {
            let expected = common::graded_cohomology(c, p, q);
            if inf.dim(p, q) != expected {
                return Err(format!("complex {k} at ({p}, {q}): {} vs {expected}", inf.dim(p, q)));
            }
            entries += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(30) {
        return Err(format!("took {elapsed:.2?}"));
    }
    Ok(format!("{} complexes, {entries} entries, {elapsed:.2?}", corpus.len()))
}

fn page_recursion(corpus: &[FilteredComplex]) -> Verdict {
    let mut checked = 0;
    for (k, c) in corpus.iter().enumerate() {
        let last = c.filtration_length() + 2;
        let mut current = page(c, 0).map_err(|e| e.to_string())?;
        for r in 0..last {
            let next = page(c, r + 1).map_err(|e| e.to_string())?;
            for (p, q) in positions(c) {
                if next.dim(p, q) != current.cohomology_dim(p, q) {
                    return Err(format!("complex {k}, r = {r}, ({p}, {q})"));
                }
                checked += 1;
            }
            current = next;
        }
    }
    Ok(format!("{checked} entries"))
}

fn double_complexes() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cells = 0;
    for k in 0..DOUBLE_CORPUS {
        let dc = common::random_double_complex(&mut rng);
        let total = dc.total(chernlab::spectral::DoubleFiltration::Vertical).map_err(|e| e.to_string())?;
        let (e1, e2) = (page(&total, 1).map_err(|e| e.to_string())?, page(&total, 2).map_err(|e| e.to_string())?);
        for i in 0..dc.width() {
            for j in 0..dc.height() {
                // The vertical filtration puts Ω^{i,j} at (p, q) = (j, i).
                let (p, q) = (j as i64, i as i64);
                let (h, vh) = (common::horizontal_cohomology(&dc, i, j), common::vertical_of_horizontal(&dc, i, j));
                if e1.dim(p, q) != h || e2.dim(p, q) != vh {
                    return Err(format!("complex {k} at ({i}, {j}): E1 {} vs {h}, E2 {} vs {vh}", e1.dim(p, q), e2.dim(p, q)));
                }
                cells += 1;
            }
        }
    }
    Ok(format!("{DOUBLE_CORPUS} complexes, {cells} cells"))
}

fn gauss_bonnet_check() -> Verdict {
    let sphere = Geometry::parse("sphere:1").unwrap().surface.unwrap();
    let coarse = gauss_bonnet(&sphere, 64).map_err(|e| e.to_string())?;
    let fine = gauss_bonnet(&sphere, 128).map_err(|e| e.to_string())?;
    let (e1, e2) = ((coarse - 2.0).abs(), (fine - 2.0).abs());
    if e1 > GAUSS_BONNET_TOL {
        return Err(format!("chi = {coarse} at mesh 64"));
    }
    if e1 < MESH_RATIO * e2 {
        return Err(format!("errors {e1:.2e} -> {e2:.2e}"));
    }
    let torus = Geometry::parse("flat-torus:2").unwrap().surface.unwrap();
    let t = gauss_bonnet(&torus, 64).map_err(|e| e.to_string())?;
    if t != 0.0 {
        return Err(format!("torus gives {t}"));
    }
    Ok(format!("sphere {coarse:.6} (error ratio {:.2}), torus exactly 0", e1 / e2))
}

fn pfaffians() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for size in [2, 4, 6] {
        for _ in 0..PFAFFIAN_CASES {
            let m = DMatrix::from_fn(size, size, |_, _| rng.gen_range(-1.0..1.0));
            let a = &m - m.transpose();
            let b = DMatrix::from_fn(size, size, |_, _| rng.gen_range(-1.0..1.0));
            let pf = pfaffian(&a).map_err(|e| e.to_string())?;
            let det = a.determinant();
            let bab = &b * &a * b.transpose();
            let skew = (&bab - bab.transpose()) * 0.5;
            let lhs = pfaffian(&skew).map_err(|e| e.to_string())?;
            let rhs = b.determinant() * pf;
            let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel(pf * pf, det)).max(rel(lhs, rhs));
        }
    }
    if worst > PFAFFIAN_REL_TOL {
        return Err(format!("relative error {worst:.2e}"));
    }
    Ok(format!("{} cases, max relative error {worst:.1e}", 3 * PFAFFIAN_CASES))
}

fn completeness() -> Verdict {
    let hopf = Geometry::parse("hopf:2").unwrap().connection;
    for p in [[1.0, 0.0], [0.6, -0.8], [-0.3, 0.4]] {
        let v = [-p[0], -p[1]];
        let traj = geodesic(&hopf, &p, &v, 2.0, 2 * STEPS_PER_UNIT).map_err(|e| e.to_string())?;
        if !traj.escape_flag || traj.end_time() >= 1.01 {
            return Err(format!("hopf from {p:?}: escape {} at t = {}", traj.escape_flag, traj.end_time()));
        }
    }
    let torus = Geometry::parse("flat-torus:2").unwrap().connection;
    for v in [[1.0, 0.0], [0.3, 0.7], [-2.0, PI]] {
        let traj = geodesic(&torus, &[0.5, 0.5], &v, 100.0, 100 * STEPS_PER_UNIT).map_err(|e| e.to_string())?;
        if traj.escape_flag || traj.end_time() != 100.0 {
            return Err(format!("torus with v = {v:?} stopped at t = {}", traj.end_time()));
        }
    }
    Ok("Hopf geodesics escape before t = 1.01, torus geodesics reach t = 100".into())
}

fn para_structures() -> Verdict {
    for m in 1..=4 {
        let report = para_structure_check(m, PARA_SAMPLES);
        if let Some(c) = report.checks.iter().find(|c| !c.passed) {
            return Err(format!("m = {m}: {} has error {:.2e}", c.name, c.max_error));
        }
    }
    Ok(format!("m = 1..=4 with {PARA_SAMPLES} values of z"))
}

fn smillie_numbers() -> Verdict {
    let four = euler_char(&SpaceExpr::smillie_m4()).map_err(|e| e.to_string())?;
    let six = euler_char(&SpaceExpr::smillie_m6()).map_err(|e| e.to_string())?;
    if (four, six) != (4, 8) {
        return Err(format!("chi(M4) = {four}, chi(M6) = {six}"));
    }
    for dim in (4..=40).step_by(2) {
        let (_, chi) = smillie(dim).map_err(|e| e.to_string())?;
        if chi == 0 {
            return Err(format!("dimension {dim} gives 0"));
        }
    }
    Ok("chi(M4) = 4, chi(M6) = 8, nonzero in every even dimension 4..=40".into())
}

fn main() {
    let corpus = full_corpus();
    let spectral = spectral_corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("Milnor realization table", Box::new(realization_table)),
        ("dual-method agreement", Box::new(|| dual_methods(corpus.as_ref().map_err(Clone::clone)?))),
        ("Milnor inequality", Box::new(|| inequality(corpus.as_ref().map_err(Clone::clone)?))),
        ("seed matrices", Box::new(seed_matrices)),
        ("spectral convergence", Box::new(|| convergence(&spectral))),
        ("page recursion", Box::new(|| page_recursion(&spectral))),
        ("double-complex pages", Box::new(double_complexes)),
        ("Gauss-Bonnet", Box::new(gauss_bonnet_check)),
        ("Pfaffian identities", Box::new(pfaffians)),
        ("completeness probes", Box::new(completeness)),
        ("para-hypercomplex identities", Box::new(para_structures)),
        ("Smillie numbers", Box::new(smillie_numbers)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check));
        let took = start.elapsed();
        match verdict {
            Ok(Ok(detail)) => println!("PASS {:>2} {name}: {detail} [{took:.2?}]", k + 1),
            Ok(Err(detail)) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{took:.2?}]", k + 1);
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {:>2} {name}: panicked", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
