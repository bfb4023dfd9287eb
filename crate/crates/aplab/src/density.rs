//! Subsets of groups as first-class objects: normalized measures μ_A,
//! densities, the lo(·) shorthand, exact 3AP counting (Fourier path against a
//! brute-force oracle), and set generators (random, planted, Behrend).

use crate::error::{Error, Result};
use crate::grp::{gcd, Elem, Group, Subspace, BRUTE_FORCE_CAP};
use crate::harmonic::{self, GFunc, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// A subset of a group: sorted member list plus a bitset for O(1) membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetG {
    group: Group,
    members: Vec<Elem>,
    bits: Vec<u64>,
}

impl SubsetG {
    pub fn new(group: Group, mut members: Vec<Elem>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.last().is_some_and(|&m| m as u64 >= group.order()) {
            return Err(Error::Contract("set member out of group range".into()));
        }
        let mut bits = vec![0u64; (group.order() as usize).div_ceil(64)];
        for &m in &members {
            bits[m as usize / 64] |= 1 << (m % 64);
        }
        Ok(SubsetG {
            group,
            members,
            bits,
        })
    }

    pub fn full(group: Group) -> Self {
        SubsetG::new(group, group.elems().collect()).expect("full set")
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn members(&self) -> &[Elem] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn density(&self) -> f64 {
        self.members.len() as f64 / self.group.order() as f64
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.bits[x as usize / 64] >> (x % 64) & 1 == 1
    }

    /// Indicator function 1_A as a physical-side GFunc.
    pub fn indicator(&self) -> GFunc {
        let mut f = GFunc::zero(self.group, Side::Physical);
        for &m in &self.members {
            f.values_mut()[m as usize] = Complex64::new(1.0, 0.0);
        }
        f
    }

    /// {x ∈ A : x + s ∈ A} = A ∩ (A − s).
    pub fn shifted_intersect(&self, s: Elem) -> SubsetG {
        let members: Vec<Elem> = self
            .members
            .iter()
            .copied()
            .filter(|&x| self.contains(self.group.add(x, s)))
            .collect();
        SubsetG::new(self.group, members).expect("subset of a valid set")
    }

    pub fn intersect(&self, other: &SubsetG) -> Result<SubsetG> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        let members: Vec<Elem> = self
            .members
            .iter()
            .copied()
            .filter(|&x| other.contains(x))
            .collect();
        SubsetG::new(self.group, members)
    }

    /// {x + t : x ∈ A}.
    pub fn translate(&self, t: Elem) -> SubsetG {
        let members: Vec<Elem> = self
            .members
            .iter()
            .map(|&x| self.group.add(x, t))
            .collect();
        SubsetG::new(self.group, members).expect("translate stays in range")
    }

    pub fn is_symmetric(&self) -> bool {
        self.members.iter().all(|&x| self.contains(self.group.neg(x)))
    }
}

/// μ_A = α⁻¹·1_A, the normalized measure of a nonempty set: ‖μ_A‖₁ = 1.
pub fn normalized_measure(a: &SubsetG) -> Result<GFunc> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let weight = a.group.order() as f64 / a.len() as f64;
    let mut f = GFunc::zero(a.group, Side::Physical);
    for &m in &a.members {
        f.values_mut()[m as usize] = Complex64::new(weight, 0.0);
    }
    Ok(f)
}

/// lo(δ) = log(2/δ), natural log, for δ ∈ (0,1].
pub fn lo(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("lo(δ) needs δ ∈ (0,1], got {delta}")));
    }
    Ok((2.0 / delta).ln())
}

/// {k·s mod N : s ∈ S} on a cyclic group; requires gcd(k, N) = 1 so the
/// dilate is a bijection.
pub fn dilate_set(k: u64, s: &SubsetG) -> Result<SubsetG> {
    let n = match s.group.kind() {
        crate::grp::GroupKind::Cyclic { n } => n,
        _ => return Err(Error::UnsupportedKind("dilate_set needs a cyclic group")),
    };
    if gcd(k % n, n) != 1 {
        return Err(Error::InvalidDilate { k, n });
    }
    let members: Vec<Elem> = s.members.iter().map(|&x| s.group.scale(k, x)).collect();
    SubsetG::new(s.group, members)
}

/// Ordered 3AP counts: pairs (x, d) with x, x+d, x+2d ∈ A. `raw_triples`
/// includes d = 0; those are the trivial progressions, so
/// raw = nontrivial + |A| always.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ThreeAPReport {
    pub raw_triples: u64,
    pub nontrivial_triples: u64,
    /// raw/|G|², the normalized count.
    pub normalized: f64,
}

impl std::fmt::Display for ThreeAPReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "raw {} nontrivial {} normalized {:.6e}",
            self.raw_triples, self.nontrivial_triples, self.normalized
        )
    }
}

fn brute_force_3aps(a: &SubsetG) -> u64 {
    let g = a.group;
    let mut count = 0u64;
    for &x in &a.members {
        for d in g.elems() {
            let y = g.add(x, d);
            if a.contains(y) && a.contains(g.add(y, d)) {
                count += 1;
            }
        }
    }
    count
}

/// Counts ordered 3APs by the Fourier identity
/// raw = |G|²·Σ_γ f̂(γ)²·f̂(−2γ), f = 1_A, and cross-checks against the
/// brute-force double loop for |G| ≤ 2¹². Needs odd order so x ↦ 2x is a
/// bijection; q = 2 is refused.
pub fn count_3aps(a: &SubsetG) -> Result<ThreeAPReport> {
    let g = a.group;
    match g.kind() {
        crate::grp::GroupKind::VectorSpace { q: 2, .. } => {
            return Err(Error::EvenOrder("3AP counting refuses q = 2"));
        }
        crate::grp::GroupKind::Cyclic { n } if n % 2 == 0 => {
            return Err(Error::EvenOrder("3AP counting needs odd N"));
        }
        _ => {}
    }
    let fh = harmonic::dft(&a.indicator())?;
    let mut acc = Complex64::new(0.0, 0.0);
    for gamma in g.elems() {
        let m2 = g.neg(g.scale(2, gamma));
        acc += fh.at(gamma) * fh.at(gamma) * fh.at(m2);
    }
    let order = g.order() as f64;
    let raw_f = acc.re * order * order;
    let raw = raw_f.round();
    if (raw_f - raw).abs() > 0.25 || acc.im.abs() * order * order > 0.25 {
        return Err(Error::AssertionFailed {
            name: "count_3aps fourier path not near an integer",
            value: raw_f,
            bound: raw,
        });
    }
    let raw = raw as u64;
    if g.order() <= BRUTE_FORCE_CAP {
        let brute = brute_force_3aps(a);
        if brute != raw {
            return Err(Error::AssertionFailed {
                name: "count_3aps fourier path disagrees with brute force",
                value: raw as f64,
                bound: brute as f64,
            });
        }
    }
    Ok(ThreeAPReport {
        raw_triples: raw,
        nontrivial_triples: raw - a.len() as u64,
        normalized: raw as f64 / (order * order),
    })
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Progression-free subset of {1,…,N} embedded in ℤ/(2N+1), where modular
/// and integer 3APs coincide. Candidates are spheres {x : Σxᵢ² = r} of
/// digit vectors {0,…,d−1}^n written in base 2d−1 (digit sums never carry,
/// and a sphere has no 3 collinear points); the radius r, the digit bound d
/// and the dimension n are all chosen by exhaustive scan. For d = 2 the
/// digit equation xᵢ+zᵢ = 2yᵢ over {0,1} already forces x = z = y, so the
/// whole cube joins the scan as the union-of-radii candidate.
pub fn behrend_set(n_range: u64) -> Result<SubsetG> {
    if !(8..=1_000_000).contains(&n_range) {
        return Err(Error::Domain(format!(
            "behrend_set needs 8 <= N <= 10^6, got {n_range}"
        )));
    }
    let modulus = 2 * n_range + 1;
    let group = Group::cyclic(modulus)?; // errors past the dense-storage cap
    let limit = n_range - 1; // values kept in [0, N-1], shifted to [1, N] at the end

    let mut best: Vec<u32> = Vec::new();
    for dims in 2usize..=20 {
        // largest digit bound whose lower dims-1 digits fit the range (the
        // top digit may be only partially usable; the filter handles it),
        // capped so a single (n, d) enumeration stays below 2^23 vectors
        let mut d_max = 0u64;
        for d in 2u64.. {
            let base = 2 * d - 1;
            let within_range = base
                .checked_pow(dims as u32 - 1)
                .is_some_and(|span| span <= 2 * n_range + 1);
            let within_budget = d
                .checked_pow(dims as u32)
                .is_some_and(|count| count <= 1 << 23);
            if within_range && within_budget {
                d_max = d;
            } else {
                break;
            }
        }
        if d_max < 2 {
            break;
        }
        for d in [d_max, 2] {
            let base = 2 * d - 1;
            let mut spheres: HashMap<u64, Vec<u32>> = HashMap::new();
            let mut cube: Vec<u32> = Vec::new();
            let mut digits = vec![0u64; dims];
            loop {
                let mut phi = 0u64;
                let mut r = 0u64;
                for &x in digits.iter().rev() {
                    phi = phi * base + x;
                }
                for &x in &digits {
                    r += x * x;
                }
                if phi <= limit {
                    spheres.entry(r).or_default().push(phi as u32);
                    if d == 2 {
                        cube.push(phi as u32);
                    }
                }
                // odometer
                let mut i = 0;
                loop {
                    if i == dims {
                        break;
                    }
                    digits[i] += 1;
                    if digits[i] < d {
                        break;
                    }
                    digits[i] = 0;
                    i += 1;
                }
                if i == dims {
                    break;
                }
            }
            for v in spheres.into_values() {
                if v.len() > best.len() {
                    best = v;
                }
            }
            if d == 2 && cube.len() > best.len() {
                best = cube;
            }
            if d == 2 {
                break; // d_max == 2 already covered
            }
        }
    }
    let members: Vec<u32> = best.into_iter().map(|x| x + 1).collect();
    SubsetG::new(group, members)
}

/// Bernoulli(α) sample of the group, driven by a counter-based generator;
/// the same seed always yields the same set.
pub fn random_set(group: Group, alpha_target: f64, seed: u64) -> Result<SubsetG> {
    if !(alpha_target > 0.0 && alpha_target <= 1.0) {
        return Err(Error::Domain(format!(
            "random_set needs α ∈ (0,1], got {alpha_target}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members: Vec<Elem> = group
        .elems()
        .filter(|_| rng.gen::<f64>() < alpha_target)
        .collect();
    SubsetG::new(group, members)
}

/// Test fixture for the subspace bootstrapping hypotheses: a planted
/// subspace V₀ plus a noise fraction of outside points.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub a: SubsetG,
    pub a1: SubsetG,
    pub a2: SubsetG,
    pub s: SubsetG,
    pub v0: Subspace,
    pub seed_used: u64,
}

/// Builds A = V₀ ∪ noise, A₁ = A₂ = A ∩ V₀, S = {x : μ_A∘μ_A(x) ≥ 1+4ε},
/// and verifies both bootstrapping hypotheses numerically, retrying with
/// incremented seeds up to 100 times.
pub fn planted_instance(
    group: Group,
    codim0: u32,
    noise: f64,
    eps: f64,
    seed: u64,
) -> Result<PlantedInstance> {
    let (_q, n) = group.qn().ok_or(Error::UnsupportedKind(
        "planted_instance needs a vector-space group",
    ))?;
    if codim0 < 1 || codim0 >= n {
        return Err(Error::Domain("need 1 <= codim0 < n".into()));
    }
    if !(0.0..0.2).contains(&noise) {
        return Err(Error::Domain("need noise ∈ [0, 0.2)".into()));
    }
    if !(eps > 0.0 && eps < 0.125) {
        return Err(Error::Domain("need ε ∈ (0, 1/8)".into()));
    }

    let mut last_reason = String::new();
    for attempt in 0..100u64 {
        let seed_used = seed.wrapping_add(attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(seed_used);
        // random dual set of full rank codim0
        let v0 = loop {
            let dual: Vec<u32> = (0..codim0)
                .map(|_| rng.gen_range(1..group.order()) as u32)
                .collect();
            let v = crate::grp::annihilator_subspace(&group, &dual)?;
            if v.codim() == codim0 as usize {
                break v;
            }
        };
        let v0_elems = v0.elements(&group);
        let mut members = v0_elems.clone();
        let noise_count = (noise * v0_elems.len() as f64).round() as usize;
        let mut added = 0usize;
        let mut guard = 0u32;
        while added < noise_count && guard < 10_000 {
            let x = rng.gen_range(0..group.order()) as Elem;
            if !v0.contains(&group, x) && !members.contains(&x) {
                members.push(x);
                added += 1;
            }
            guard += 1;
        }
        let a = SubsetG::new(group, members)?;
        let a1 = SubsetG::new(group, v0_elems.clone())?;
        let a2 = a1.clone();

        let mu_a = normalized_measure(&a)?;
        let w = harmonic::diff_convolve(&mu_a, &mu_a)?;
        let thr = 1.0 + 4.0 * eps;
        let s_members: Vec<Elem> = group.elems().filter(|&x| w.at(x).re >= thr).collect();
        let s = SubsetG::new(group, s_members)?;
        if s.is_empty() {
            last_reason = "level set S empty".into();
            continue;
        }
        // hypothesis (1): ⟨μ_{A₁}∘μ_{A₂}, 1_S⟩ ≥ 1−ε ; (2) holds by the
        // construction of S as the superlevel set, re-checked on the minimum.
        let g12 = harmonic::diff_convolve(&normalized_measure(&a1)?, &normalized_measure(&a2)?)?;
        let inner = harmonic::inner(&g12, &s.indicator())?.re;
        let min_corr = s
            .members()
            .iter()
            .map(|&x| w.at(x).re)
            .fold(f64::INFINITY, f64::min);
        if inner >= 1.0 - eps && min_corr >= thr - 1e-9 {
            return Ok(PlantedInstance {
                a,
                a1,
                a2,
                s,
                v0,
                seed_used,
            });
        }
        last_reason = format!("hypotheses failed: inner {inner}, min_corr {min_corr}");
    }
    Err(Error::GenerationFailure {
        retries: 100,
        reason: last_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_measure_basics() {
        let g = Group::cyclic(8).unwrap();
        let a = SubsetG::full(g);
        let mu = normalized_measure(&a).unwrap();
        for x in g.elems() {
            assert!((mu.at(x).re - 1.0).abs() < 1e-12);
        }
        let a = SubsetG::new(g, vec![0]).unwrap();
        let mu = normalized_measure(&a).unwrap();
        assert!((mu.at(0).re - 8.0).abs() < 1e-12);
        assert!(matches!(
            normalized_measure(&SubsetG::new(g, vec![]).unwrap()),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn normalized_measure_mass_one_random() {
        let g = Group::cyclic(101).unwrap();
        for seed in 0..50 {
            let a = random_set(g, 0.35, seed).unwrap();
            if a.is_empty() {
                continue;
            }
            let mu = normalized_measure(&a).unwrap();
            assert!((mu.l1() - 1.0).abs() < 1e-9);
            // μ_A∘μ_A(0) = 1/α
            let w = harmonic::diff_convolve(&mu, &mu).unwrap();
            assert!((w.at(0).re - 1.0 / a.density()).abs() < 1e-9 / a.density());
        }
    }

    #[test]
    fn lo_values() {
        assert!((lo(1.0).unwrap() - 2.0f64.ln()).abs() < 1e-12);
        assert!((lo(2.0 / std::f64::consts::E.powi(2)).unwrap() - 2.0).abs() < 1e-12);
        assert!((lo(0.01).unwrap() - 200.0f64.ln()).abs() < 1e-12);
        assert!(lo(0.0).is_err());
        assert!(lo(1.5).is_err());
    }

    #[test]
    fn dilate_examples() {
        let g = Group::cyclic(7).unwrap();
        let s = SubsetG::new(g, vec![1, 2]).unwrap();
        assert_eq!(dilate_set(1, &s).unwrap().members(), s.members());
        assert_eq!(dilate_set(3, &s).unwrap().members(), &[3, 6]);
        let g12 = Group::cyclic(12).unwrap();
        let s = SubsetG::new(g12, vec![1]).unwrap();
        assert!(matches!(
            dilate_set(4, &s),
            Err(Error::InvalidDilate { .. })
        ));
        // size preserved under any valid dilate
        let s = random_set(g12, 0.5, 3).unwrap();
        for k in [1u64, 5, 7, 11] {
            assert_eq!(dilate_set(k, &s).unwrap().len(), s.len());
        }
    }

    #[test]
    fn count_3aps_full_group() {
        let g = Group::cyclic(7).unwrap();
        let rep = count_3aps(&SubsetG::full(g)).unwrap();
        assert_eq!(rep.raw_triples, 49);
        assert_eq!(rep.nontrivial_triples, 42);
    }

    #[test]
    fn count_3aps_small_interval() {
        // A = {0,1,2} ⊂ ℤ/7: trivial 3 plus (0,1,2) and its reverse.
        let g = Group::cyclic(7).unwrap();
        let a = SubsetG::new(g, vec![0, 1, 2]).unwrap();
        let rep = count_3aps(&a).unwrap();
        assert_eq!(rep.raw_triples, 5);
        assert_eq!(rep.nontrivial_triples, 2);
    }

    #[test]
    fn count_3aps_rejects_even_order() {
        let g = Group::cyclic(8).unwrap();
        assert!(matches!(
            count_3aps(&SubsetG::full(g)),
            Err(Error::EvenOrder(_))
        ));
        let g = Group::vector_space(2, 3).unwrap();
        assert!(matches!(
            count_3aps(&SubsetG::full(g)),
            Err(Error::EvenOrder(_))
        ));
    }

    #[test]
    fn count_3aps_fourier_equals_brute_on_random_sets() {
        for (g, seeds) in [
            (Group::cyclic(101).unwrap(), 12u64),
            (Group::cyclic(243).unwrap(), 12),
            (Group::vector_space(3, 4).unwrap(), 12),
        ] {
            for seed in 0..seeds {
                let a = random_set(g, 0.3, seed).unwrap();
                // count_3aps cross-checks internally below the brute-force cap
                let rep = count_3aps(&a).unwrap();
                assert_eq!(rep.raw_triples - rep.nontrivial_triples, a.len() as u64);
            }
        }
    }

    #[test]
    fn behrend_small_and_medium() {
        let s = behrend_set(8).unwrap();
        assert!(s.len() >= 4, "N=8 floor from the greedy oracle is 4");
        assert!(s.members().iter().all(|&x| (1..=8).contains(&x)));
        let rep = count_3aps(&s).unwrap();
        assert_eq!(rep.nontrivial_triples, 0);

        let s = behrend_set(1000).unwrap();
        assert!(s.members().iter().all(|&x| (1..=1000).contains(&x)));
        let rep = count_3aps(&s).unwrap();
        assert_eq!(rep.nontrivial_triples, 0, "Behrend output must be 3AP-free");
        assert!(s.len() >= 40, "Behrend at N=1000 should beat 40, got {}", s.len());
    }

    /// Greedy 3AP-free oracle over {1,…,N}; the floor the construction must
    /// beat at small N.
    fn greedy_free(n: u64) -> Vec<u64> {
        let mut s: Vec<u64> = Vec::new();
        for c in 1..=n {
            let ok = s.iter().all(|&b| {
                // c as largest element: a, b, c with a = 2b - c
                !(2 * b >= c && 2 * b - c != b && s.contains(&(2 * b - c)))
            }) && s.iter().all(|&a| {
                // c as middle: a, c, 2c - a
                2 * c - a == c || !s.contains(&(2 * c - a))
            });
            if ok {
                s.push(c);
            }
        }
        s
    }

    #[test]
    fn behrend_not_worse_than_greedy_small() {
        for n in [8u64, 16, 32] {
            let s = behrend_set(n).unwrap();
            let g = greedy_free(n);
            assert!(
                s.len() >= g.len() / 2 && s.len() >= 4.min(g.len()),
                "behrend({n}) = {} too small vs greedy {}",
                s.len(),
                g.len()
            );
        }
    }

    #[test]
    fn behrend_rejects_out_of_range() {
        assert!(behrend_set(4).is_err());
        assert!(behrend_set(2_000_000).is_err());
        // within the documented range but past the dense-storage cap
        assert!(matches!(behrend_set(600_000), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn random_set_determinism_and_extremes() {
        let g = Group::cyclic(512).unwrap();
        let a = random_set(g, 0.3, 99).unwrap();
        let b = random_set(g, 0.3, 99).unwrap();
        assert_eq!(a.members(), b.members());
        let full = random_set(g, 1.0, 5).unwrap();
        assert_eq!(full.len() as u64, g.order());
    }

    #[test]
    fn random_set_density_in_binomial_band() {
        let g = Group::cyclic(4096).unwrap();
        let alpha = 0.3;
        let mean: f64 = (0..100)
            .map(|seed| random_set(g, alpha, seed).unwrap().density())
            .sum::<f64>()
            / 100.0;
        let sigma = (alpha * (1.0 - alpha) / 4096.0f64).sqrt() / 10.0;
        assert!(
            (mean - alpha).abs() <= 3.0 * sigma,
            "mean {mean} outside 3σ band around {alpha}"
        );
    }

    #[test]
    fn planted_instance_clean() {
        let g = Group::vector_space(3, 5).unwrap();
        let inst = planted_instance(g, 2, 0.0, 0.1, 1).unwrap();
        // With no noise A = V₀, μ_A∘μ_A = q^codim on V₀, so S ⊇ V₀ and the
        // inner product is exactly 1.
        assert_eq!(inst.a.len() as u64, inst.v0.size());
        for &x in inst.v0.elements(&g).iter() {
            assert!(inst.s.contains(x));
        }
        let g12 = harmonic::diff_convolve(
            &normalized_measure(&inst.a1).unwrap(),
            &normalized_measure(&inst.a2).unwrap(),
        )
        .unwrap();
        let ip = harmonic::inner(&g12, &inst.s.indicator()).unwrap().re;
        assert!((ip - 1.0).abs() < 1e-9);
    }

    #[test]
    fn planted_instance_noisy() {
        let g = Group::vector_space(3, 5).unwrap();
        let inst = planted_instance(g, 2, 0.05, 0.1, 7).unwrap();
        assert!(inst.a.len() > inst.a1.len());
        assert_eq!(inst.a1.members(), inst.a2.members());
    }
}
