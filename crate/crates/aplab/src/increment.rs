//! The density-increment core: almost-period sets, the improved
//! bootstrapping from an almost-period set X to a subspace (𝔽_q^n) or a
//! Bohr set (ℤ/N) of almost-periods, the pluggable sifting oracle, the
//! subspace increment step and its iteration, and the single integer step.
//!
//! Every displayed inequality with an explicit constant is a hard assertion
//! (an [`Error::AssertionFailed`] carries the failing quantity); every
//! O(·)-shaped conclusion is a measured ratio in the [`BoundReport`],
//! reported and never asserted. With ε_step = ε/k the per-element scan
//! X = {t : ‖τ_t F₀ − F₀‖_∞ ≤ ε_step} makes the μ_X^{(k)} conclusions hold
//! by the triangle inequality, deterministically; the price is that |X| is
//! a measurement, not a guaranteed fraction of the domain.

use crate::bohr::{self, BohrSet, Regularity};
use crate::density::{self, normalized_measure, SubsetG};
use crate::error::{Error, Result};
use crate::grp::{gcd, Elem, Group, GroupKind, Subspace};
use crate::harmonic::{self, dft, idft, GFunc, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SLACK: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct HypothesisReport {
    /// ⟨μ_{A₁}∘μ_{A₂}, 1_S⟩
    pub inner_product: f64,
    /// min over S of μ_A∘μ_A, times μ(B) in the Bohr ambient; +∞ on empty S
    pub min_corr_on_s: f64,
    pub alpha: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub ok: bool,
}

/// Measured quantities against the lemma's O(·) shapes. Report-only: the
/// absolute constants are unspecified, so nothing here is asserted.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    pub lo_alpha: f64,
    pub lo_alpha1: f64,
    pub lo_alpha2: f64,
    /// (codim − 0) resp. (rank − d), divided by lo(α)²·lo(α₁)·lo(α₂)
    pub ratio: f64,
    /// |X| / |D|
    pub x_fraction: f64,
    /// exp(−ε⁻²k²·lo(α₁)·lo(α₂)), the almost-periodicity size shape
    pub x_shape: f64,
    /// Bohr case: ln(|B‴|/|B″|) / (−L·(d + lo(α)²lo(α₁)lo(α₂)))
    pub size_log_ratio: Option<f64>,
}

/// The asserted chain, kept for tracing.
#[derive(Debug, Clone, Copy)]
pub struct ChainReport {
    /// ⟨μ_X^{(k)}∗μ_{A₁}∘μ_{A₂}, 1_S⟩
    pub inner_with_s: f64,
    /// ⟨μ_X^{(k)}∗μ_{A₁}∘μ_{A₂}, μ_A∘μ_A⟩
    pub inner_with_corr: f64,
    /// max over checked t of ‖τ_t(μ_X^{(k)}∗F) − μ_X^{(k)}∗F‖_∞
    pub max_translation_defect: f64,
    /// ⟨μ_V∗μ_X^{(k)}∗g, μ_A∘μ_A⟩ resp. the μ_{B‴} version
    pub smoothed_inner: f64,
    /// ‖μ_X^{(k)}∗F₀ − F₀‖_∞
    pub linf_defect: f64,
    /// Σ_γ |F̂(γ)| for F = μ_{A₁}∘μ_{A₂}∗μ_A∘μ_A — the key cancellation,
    /// asserted ≤ α⁻¹ (times μ(B)⁻¹ in the Bohr normalization)
    pub fourier_mass: f64,
}

#[derive(Debug, Clone)]
pub enum IncrementSubstrate {
    Subspace(Subspace),
    Bohr(BohrSet),
}

#[derive(Debug, Clone)]
pub struct BootstrapResult {
    pub substrate: IncrementSubstrate,
    pub codim_or_rank: usize,
    pub k_used: u32,
    pub x: SubsetG,
    /// ‖μ_V∗μ_A‖_∞, resp. ‖μ_{B‴}∗μ_A‖_∞·μ(B)
    pub witness_sup: f64,
    pub chain: ChainReport,
    pub bound: BoundReport,
}

#[derive(Debug, Clone)]
pub struct SiftResult {
    pub a1: SubsetG,
    pub a2: SubsetG,
    /// x with A₂ ⊆ D₂ − x in the constrained ambient; 0 otherwise
    pub shift: Elem,
    /// ⟨μ_{A₁}∘μ_{A₂}, 1_S⟩, recomputed by direct pair summation
    pub achieved: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub strategy: &'static str,
}

#[derive(Debug, Clone)]
pub enum SiftStrategy {
    /// Read A₁, A₂ from a planted fixture; keeps acceptance runs deterministic.
    Planted {
        a1: SubsetG,
        a2: SubsetG,
        shift: Elem,
    },
    /// Sample shifts s,t and keep the best A₁ = A∩(A−s), A₂ = A∩(A−t).
    Randomized { trials: u32, seed: u64 },
    /// All shift pairs; |G| ≤ 2¹⁰ only.
    Exhaustive,
}

#[derive(Debug, Clone, Default)]
pub struct SiftConfig {
    pub strategy: Option<SiftStrategy>,
    /// Containers for A₁ and A₂ (k·B′ and k·B″ in the integer step).
    pub domain1: Option<SubsetG>,
    pub domain2: Option<SubsetG>,
}

// ---------------------------------------------------------------------------
// Almost-period machinery
// ---------------------------------------------------------------------------

/// X = {t ∈ D : ‖τ_t F₀ − F₀‖_∞ ≤ ε_step}. Contains 0 whenever 0 ∈ D and is
/// symmetric within a symmetric D. Empty X is returned, not an error.
pub fn almost_period_set(f0: &GFunc, domain: &SubsetG, eps_step: f64) -> Result<SubsetG> {
    if f0.side() != Side::Physical {
        return Err(Error::Contract("almost_period_set needs a physical F₀".into()));
    }
    if f0.group() != domain.group() {
        return Err(Error::GroupMismatch);
    }
    if eps_step <= 0.0 {
        return Err(Error::Domain("need ε_step > 0".into()));
    }
    if domain.is_empty() {
        return Err(Error::Domain("almost-period domain is empty".into()));
    }
    let members: Vec<Elem> = domain
        .members()
        .iter()
        .copied()
        .filter(|&t| harmonic::translation_defect(f0, t) <= eps_step)
        .collect();
    SubsetG::new(*f0.group(), members)
}

/// ‖μ_X^{(k)} ∗ F₀ − F₀‖_∞.
pub fn verify_linf_ap(x: &SubsetG, k: u32, f0: &GFunc) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptySet);
    }
    if k < 1 {
        return Err(Error::Domain("need k >= 1".into()));
    }
    let mu_x = normalized_measure(x)?;
    let xh = dft(&mu_x)?;
    let fh = dft(f0)?;
    let vals: Vec<Complex64> = xh
        .values()
        .iter()
        .zip(fh.values().iter())
        .map(|(a, b)| a.powi(k as i32) * b)
        .collect();
    let smoothed = idft(&GFunc::new(*f0.group(), Side::Fourier, vals)?)?;
    let mut worst = 0.0f64;
    for (a, b) in smoothed.values().iter().zip(f0.values().iter()) {
        worst = worst.max((a - b).norm());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Hypothesis checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub enum Ambient<'a> {
    Ffq,
    Bohr {
        b: &'a BohrSet,
        b_prime: &'a BohrSet,
        b_second: &'a BohrSet,
    },
}

/// Exact evaluation of the two bootstrapping hypotheses. In the 𝔽_q case
/// these are ⟨μ_{A₁}∘μ_{A₂}, 1_S⟩ ≥ 1−ε and μ_A∘μ_A ≥ 1+4ε on S with
/// ε ∈ (0,1/8); in the Bohr case ε ∈ (0,1/10), the correlation threshold is
/// (1+2ε)μ(B)⁻¹, densities are relative to the ambient sets, and
/// |S| ≤ 2|B′| is required.
pub fn check_hypotheses(
    a: &SubsetG,
    a1: &SubsetG,
    a2: &SubsetG,
    s: &SubsetG,
    eps: f64,
    ambient: Ambient<'_>,
) -> Result<HypothesisReport> {
    if a.is_empty() || a1.is_empty() || a2.is_empty() {
        return Err(Error::EmptySet);
    }
    let order = a.group().order() as f64;
    let (alpha, alpha1, alpha2, corr_scale, corr_threshold) = match ambient {
        Ambient::Ffq => {
            if !(eps > 0.0 && eps < 1.0 / 8.0) {
                return Err(Error::Domain(format!("ε = {eps} outside (0, 1/8)")));
            }
            (
                a.len() as f64 / order,
                a1.len() as f64 / order,
                a2.len() as f64 / order,
                1.0,
                1.0 + 4.0 * eps,
            )
        }
        Ambient::Bohr {
            b,
            b_prime,
            b_second,
        } => {
            if !(eps > 0.0 && eps < 1.0 / 10.0) {
                return Err(Error::Domain(format!("ε = {eps} outside (0, 1/10)")));
            }
            if s.len() > 2 * b_prime.len() {
                return Err(Error::Contract(format!(
                    "|S| = {} exceeds 2|B′| = {}",
                    s.len(),
                    2 * b_prime.len()
                )));
            }
            (
                a.len() as f64 / b.len() as f64,
                a1.len() as f64 / b_prime.len() as f64,
                a2.len() as f64 / b_second.len() as f64,
                b.mu(),
                1.0 + 2.0 * eps,
            )
        }
    };
    let g12 = harmonic::diff_convolve(&normalized_measure(a1)?, &normalized_measure(a2)?)?;
    let inner_product = if s.is_empty() {
        0.0
    } else {
        harmonic::inner(&g12, &s.indicator())?.re
    };
    let mu_a = normalized_measure(a)?;
    let w = harmonic::diff_convolve(&mu_a, &mu_a)?;
    let min_corr_on_s = s
        .members()
        .iter()
        .map(|&x| w.at(x).re * corr_scale)
        .fold(f64::INFINITY, f64::min);
    let ok = inner_product >= 1.0 - eps - SLACK && min_corr_on_s >= corr_threshold - SLACK;
    Ok(HypothesisReport {
        inner_product,
        min_corr_on_s,
        alpha,
        alpha1,
        alpha2,
        ok,
    })
}

// ---------------------------------------------------------------------------
// k selection
// ---------------------------------------------------------------------------

/// Smallest k with 2^{1−k} ≤ εα/2, per the subspace bootstrap:
/// k = max(2, ⌈log₂(4/(εα))⌉ + 1).
pub fn k_for_ffq(eps: f64, alpha: f64) -> u32 {
    let k = (4.0 / (eps * alpha)).log2().ceil() + 1.0;
    (k.max(2.0)) as u32
}

/// Smallest k with (εα/10 + 2^{1−k})·α⁻¹ ≤ ε/4, per the Bohr bootstrap:
/// k = max(2, ⌈log₂(2/((ε/4 − ε/10)·α))⌉).
pub fn k_for_bohr(eps: f64, alpha: f64) -> u32 {
    let k = (2.0 / ((eps / 4.0 - eps / 10.0) * alpha)).log2().ceil();
    (k.max(2.0)) as u32
}

// ---------------------------------------------------------------------------
// Shared chain evaluation
// ---------------------------------------------------------------------------

fn assert_ge(name: &'static str, value: f64, bound: f64) -> Result<()> {
    if value >= bound - SLACK {
        Ok(())
    } else {
        Err(Error::AssertionFailed { name, value, bound })
    }
}

fn assert_le(name: &'static str, value: f64, bound: f64) -> Result<()> {
    if value <= bound + SLACK {
        Ok(())
    } else {
        Err(Error::AssertionFailed { name, value, bound })
    }
}

/// μ_X^{(k)} ∗ f in one fourier pass.
fn smooth_by_x(mu_x_hat: &GFunc, k: u32, f: &GFunc) -> Result<GFunc> {
    let fh = dft(f)?;
    let vals: Vec<Complex64> = mu_x_hat
        .values()
        .iter()
        .zip(fh.values().iter())
        .map(|(a, b)| a.powi(k as i32) * b)
        .collect();
    idft(&GFunc::new(*f.group(), Side::Fourier, vals)?)
}

/// The almost-period scan for the pair (F₀, F₁): the chain's inner product
/// moves along the swapped functional μ_{A₂}∘μ_{A₁}∗1_S, so when A₁ ≠ A₂
/// each t must be an ε_step-period of both orderings.
fn scan_periods(
    a1: &SubsetG,
    a2: &SubsetG,
    s: &SubsetG,
    domain: &SubsetG,
    eps_step: f64,
) -> Result<(GFunc, SubsetG)> {
    let mu1 = normalized_measure(a1)?;
    let mu2 = normalized_measure(a2)?;
    let ind_s = s.indicator();
    let f0 = harmonic::convolve(&harmonic::diff_convolve(&mu1, &mu2)?, &ind_s)?;
    let x = almost_period_set(&f0, domain, eps_step)?;
    if a1.members() == a2.members() {
        return Ok((f0, x));
    }
    let f1 = harmonic::convolve(&harmonic::diff_convolve(&mu2, &mu1)?, &ind_s)?;
    let x1 = almost_period_set(&f1, domain, eps_step)?;
    Ok((f0, x.intersect(&x1)?))
}

/// Deterministic sample of translation-check points: exhaustive up to 2¹⁰
/// members, an even stride of 64 otherwise.
fn defect_check_points(v: &[Elem]) -> Vec<Elem> {
    if v.len() <= 1024 {
        v.to_vec()
    } else {
        (0..64).map(|i| v[i * v.len() / 64]).collect()
    }
}

// ---------------------------------------------------------------------------
// Lemma-style bootstrap, 𝔽_q^n case
// ---------------------------------------------------------------------------

/// From hypotheses (1)–(2) to a subspace V with ‖μ_V∗μ_A‖_∞ ≥ 1+ε/2.
///
/// Pipeline: k = max(2, ⌈log₂(4/(εα))⌉+1) so 2^{1−k} ≤ εα/2; X is the exact
/// ε/k almost-period scan of F₀ = μ_{A₁}∘μ_{A₂}∗1_S; V annihilates the
/// large spectrum Δ_{1/2}(X). The asserted chain:
///   ⟨μ_X^{(k)}∗g, 1_S⟩ ≥ 1−2ε,
///   ⟨μ_X^{(k)}∗g, μ_A∘μ_A⟩ ≥ 1+ε,
///   ‖τ_t(μ_X^{(k)}∗F) − μ_X^{(k)}∗F‖_∞ ≤ ε/2 for t ∈ V,
///   ⟨μ_V∗μ_X^{(k)}∗g, μ_A∘μ_A⟩ ≥ 1+ε/2,
///   ‖μ_V∗μ_A‖_∞ ≥ 1+ε/2,
/// each computed exactly; codim(V) against lo(α)²lo(α₁)lo(α₂) is reported,
/// never asserted.
pub fn bootstrap_ffq(
    a: &SubsetG,
    a1: &SubsetG,
    a2: &SubsetG,
    s: &SubsetG,
    eps: f64,
) -> Result<BootstrapResult> {
    let group = *a.group();
    if !group.is_vector_space() {
        return Err(Error::UnsupportedKind("bootstrap_ffq needs 𝔽_q^n"));
    }
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    let hyp = check_hypotheses(a, a1, a2, s, eps, Ambient::Ffq)?;
    if !hyp.ok {
        return Err(Error::Contract(format!(
            "bootstrap hypotheses not satisfied: inner {} min_corr {}",
            hyp.inner_product, hyp.min_corr_on_s
        )));
    }
    let alpha = hyp.alpha;
    let k = k_for_ffq(eps, alpha);
    let eps_step = eps / k as f64;

    let full = SubsetG::full(group);
    let (f0, x) = scan_periods(a1, a2, s, &full, eps_step)?;
    if x.is_empty() {
        return Err(Error::BootstrapFailure(format!(
            "no ε/k-periods at ε_step = {eps_step}"
        )));
    }

    let mu_x = normalized_measure(&x)?;
    let mu_x_hat = dft(&mu_x)?;
    let spec = harmonic::spectrum(&mu_x, 0.5)?;
    let v = crate::grp::annihilator_subspace(&group, &spec.dual_elems())?;
    let codim = v.codim();

    let g12 = harmonic::diff_convolve(&normalized_measure(a1)?, &normalized_measure(a2)?)?;
    let mu_a = normalized_measure(a)?;
    let w = harmonic::diff_convolve(&mu_a, &mu_a)?;

    let linf_defect = verify_linf_ap(&x, k, &f0)?;
    assert_le("‖μ_X^(k)∗F₀ − F₀‖_∞ ≤ ε", linf_defect, eps)?;

    let smoothed_g = smooth_by_x(&mu_x_hat, k, &g12)?;
    let inner_with_s = harmonic::inner(&smoothed_g, &s.indicator())?.re;
    assert_ge("⟨μ_X^(k)∗g, 1_S⟩ ≥ 1−2ε", inner_with_s, 1.0 - 2.0 * eps)?;

    let inner_with_corr = harmonic::inner(&smoothed_g, &w)?.re;
    assert_ge("⟨μ_X^(k)∗g, μ_A∘μ_A⟩ ≥ 1+ε", inner_with_corr, 1.0 + eps)?;

    let big_f = harmonic::convolve(&g12, &w)?;
    let fourier_mass = harmonic::l1_fourier(&big_f)?;
    assert_le("Σ|F̂| ≤ α⁻¹ (key cancellation)", fourier_mass, 1.0 / alpha)?;
    let smoothed_f = smooth_by_x(&mu_x_hat, k, &big_f)?;
    let v_elems = v.elements(&group);
    let mut max_defect = 0.0f64;
    for &t in &defect_check_points(&v_elems) {
        max_defect = max_defect.max(harmonic::translation_defect(&smoothed_f, t));
    }
    assert_le(
        "‖τ_t(μ_X^(k)∗F) − μ_X^(k)∗F‖_∞ ≤ ε/2 on V",
        max_defect,
        eps / 2.0,
    )?;

    let mu_v = normalized_measure(&SubsetG::new(group, v_elems)?)?;
    let smoothed_by_v = harmonic::convolve(&mu_v, &smoothed_g)?;
    let smoothed_inner = harmonic::inner(&smoothed_by_v, &w)?.re;
    assert_ge(
        "⟨μ_V∗μ_X^(k)∗g, μ_A∘μ_A⟩ ≥ 1+ε/2",
        smoothed_inner,
        1.0 + eps / 2.0,
    )?;

    let witness_sup = harmonic::convolve(&mu_v, &mu_a)?
        .values()
        .iter()
        .map(|c| c.re)
        .fold(0.0, f64::max);
    assert_ge("‖μ_V∗μ_A‖_∞ ≥ 1+ε/2", witness_sup, 1.0 + eps / 2.0)?;

    let lo_alpha = density::lo(alpha)?;
    let lo_alpha1 = density::lo(hyp.alpha1)?;
    let lo_alpha2 = density::lo(hyp.alpha2)?;
    let denom = lo_alpha * lo_alpha * lo_alpha1 * lo_alpha2;
    let bound = BoundReport {
        lo_alpha,
        lo_alpha1,
        lo_alpha2,
        ratio: codim as f64 / denom,
        x_fraction: x.len() as f64 / group.order() as f64,
        x_shape: (-(k as f64).powi(2) * lo_alpha1 * lo_alpha2 / (eps * eps)).exp(),
        size_log_ratio: None,
    };
    Ok(BootstrapResult {
        substrate: IncrementSubstrate::Subspace(v),
        codim_or_rank: codim,
        k_used: k,
        x,
        witness_sup,
        chain: ChainReport {
            inner_with_s,
            inner_with_corr,
            max_translation_defect: max_defect,
            smoothed_inner,
            linf_defect,
            fourier_mass,
        },
        bound,
    })
}

/// ⟨μ_{A₁}∘μ_{A₁}, μ_A∘μ_A⟩ and ⟨μ_{A₂}∘μ_{A₂}, μ_A∘μ_A⟩: a large value is
/// a discrepancy over the expected value 1 and is itself increment fuel.
pub fn inner_discrepancy(a: &SubsetG, a1: &SubsetG, a2: &SubsetG) -> Result<(f64, f64)> {
    let mu_a = normalized_measure(a)?;
    let w = harmonic::diff_convolve(&mu_a, &mu_a)?;
    let mut out = [0.0f64; 2];
    for (i, part) in [a1, a2].into_iter().enumerate() {
        let mu = normalized_measure(part)?;
        let corr = harmonic::diff_convolve(&mu, &mu)?;
        out[i] = harmonic::inner(&corr, &w)?.re;
    }
    Ok((out[0], out[1]))
}

// ---------------------------------------------------------------------------
// Lemma-style bootstrap, Bohr case
// ---------------------------------------------------------------------------

/// General-group bootstrap relative to regular Bohr sets: from hypotheses
/// (1)–(2) at scale μ(B)⁻¹ to a regular B‴ ⊆ B″ with
/// ‖μ_{B‴}∗μ_A‖_∞ ≥ (1+ε/4)μ(B)⁻¹.
///
/// Pipeline: D = find_regular(shrink(B″, 1/100d)); X = exact ε/4k period
/// scan of F₀ over D; k = max(2, ⌈log₂(2/((ε/4−ε/10)α))⌉) so that
/// (εα/10 + 2^{1−k})·α⁻¹ ≤ ε/4; B‴ = find_regular(join(D, Δ_{1/2}(X), εα/10)).
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_bohr(
    a: &SubsetG,
    a1: &SubsetG,
    a2: &SubsetG,
    shift: Elem,
    s: &SubsetG,
    b: &BohrSet,
    b_prime: &BohrSet,
    b_second: &BohrSet,
    eps: f64,
) -> Result<BootstrapResult> {
    let group = *a.group();
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    for (name, set) in [("B", b), ("B′", b_prime), ("B″", b_second)] {
        if set.regularity() != Regularity::VerifiedRegular {
            return Err(Error::Contract(format!("{name} is not verified-regular")));
        }
    }
    if !a.members().iter().all(|&x| b.contains(x)) {
        return Err(Error::Contract("A ⊄ B".into()));
    }
    if !a1.members().iter().all(|&x| b_prime.contains(x)) {
        return Err(Error::Contract("A₁ ⊄ B′".into()));
    }
    if !a2
        .members()
        .iter()
        .all(|&x| b_second.contains(group.add(x, shift)))
    {
        return Err(Error::Contract("A₂ ⊄ B″ − x".into()));
    }
    let hyp = check_hypotheses(
        a,
        a1,
        a2,
        s,
        eps,
        Ambient::Bohr {
            b,
            b_prime,
            b_second,
        },
    )?;
    if !hyp.ok {
        return Err(Error::Contract(format!(
            "bootstrap hypotheses not satisfied: inner {} min_corr {}",
            hyp.inner_product, hyp.min_corr_on_s
        )));
    }
    let alpha = hyp.alpha;
    let mu_b_inv = 1.0 / b.mu();
    let scale_slack = SLACK * mu_b_inv.max(1.0);
    let d = b_second.rank();
    let k = k_for_bohr(eps, alpha);
    let eps_step = eps / (4.0 * k as f64);

    // ρ = c/100d with c found by the regular scan (trivial at rank 0).
    let domain = bohr::find_regular(&bohr::shrink(b_second, 1.0 / (100.0 * d.max(1) as f64))?)?;
    let (f0, x) = scan_periods(a1, a2, s, domain.elements(), eps_step)?;
    if x.is_empty() {
        return Err(Error::BootstrapFailure(format!(
            "no ε/4k-periods in B″_ρ at ε_step = {eps_step}"
        )));
    }

    let mu_x = normalized_measure(&x)?;
    let mu_x_hat = dft(&mu_x)?;
    let spec = harmonic::spectrum(&mu_x, 0.5)?;
    let b3 = bohr::find_regular(&bohr::bohr_join(
        &domain,
        &spec.dual_elems(),
        eps * alpha / 10.0,
    )?)?;

    let g12 = harmonic::diff_convolve(&normalized_measure(a1)?, &normalized_measure(a2)?)?;
    let mu_a = normalized_measure(a)?;
    let w = harmonic::diff_convolve(&mu_a, &mu_a)?;

    let linf_defect = verify_linf_ap(&x, k, &f0)?;
    assert_le("‖μ_X^(k)∗F₀ − F₀‖_∞ ≤ ε/4", linf_defect, eps / 4.0)?;

    let smoothed_g = smooth_by_x(&mu_x_hat, k, &g12)?;
    let inner_with_s = harmonic::inner(&smoothed_g, &s.indicator())?.re;
    assert_ge(
        "⟨μ_X^(k)∗g, 1_S⟩ ≥ 1−(5/4)ε",
        inner_with_s,
        1.0 - 1.25 * eps,
    )?;

    let inner_with_corr = harmonic::inner(&smoothed_g, &w)?.re;
    if inner_with_corr < (1.0 + eps / 2.0) * mu_b_inv - scale_slack {
        return Err(Error::AssertionFailed {
            name: "⟨μ_X^(k)∗g, μ_A∘μ_A⟩ ≥ (1+ε/2)μ(B)⁻¹",
            value: inner_with_corr,
            bound: (1.0 + eps / 2.0) * mu_b_inv,
        });
    }

    let big_f = harmonic::convolve(&g12, &w)?;
    let fourier_mass = harmonic::l1_fourier(&big_f)?;
    if fourier_mass > mu_b_inv / alpha + scale_slack {
        return Err(Error::AssertionFailed {
            name: "Σ|F̂| ≤ α⁻¹μ(B)⁻¹ (key cancellation)",
            value: fourier_mass,
            bound: mu_b_inv / alpha,
        });
    }
    let smoothed_f = smooth_by_x(&mu_x_hat, k, &big_f)?;
    let mut max_defect = 0.0f64;
    for &t in &defect_check_points(b3.elements().members()) {
        max_defect = max_defect.max(harmonic::translation_defect(&smoothed_f, t));
    }
    if max_defect > (eps / 4.0) * mu_b_inv + scale_slack {
        return Err(Error::AssertionFailed {
            name: "‖τ_t(μ_X^(k)∗F) − μ_X^(k)∗F‖_∞ ≤ (ε/4)μ(B)⁻¹ on B‴",
            value: max_defect,
            bound: (eps / 4.0) * mu_b_inv,
        });
    }

    let mu_b3 = normalized_measure(b3.elements())?;
    let smoothed_by_b3 = harmonic::convolve(&mu_b3, &smoothed_g)?;
    let smoothed_inner = harmonic::inner(&smoothed_by_b3, &w)?.re;
    if smoothed_inner < (1.0 + eps / 4.0) * mu_b_inv - scale_slack {
        return Err(Error::AssertionFailed {
            name: "⟨μ_B‴∗μ_X^(k)∗g, μ_A∘μ_A⟩ ≥ (1+ε/4)μ(B)⁻¹",
            value: smoothed_inner,
            bound: (1.0 + eps / 4.0) * mu_b_inv,
        });
    }

    let witness_raw = harmonic::convolve(&mu_b3, &mu_a)?
        .values()
        .iter()
        .map(|c| c.re)
        .fold(0.0, f64::max);
    if witness_raw < (1.0 + eps / 4.0) * mu_b_inv - scale_slack {
        return Err(Error::AssertionFailed {
            name: "‖μ_B‴∗μ_A‖_∞ ≥ (1+ε/4)μ(B)⁻¹",
            value: witness_raw,
            bound: (1.0 + eps / 4.0) * mu_b_inv,
        });
    }
    let witness_sup = witness_raw * b.mu();

    let lo_alpha = density::lo(alpha.min(1.0))?;
    let lo_alpha1 = density::lo(hyp.alpha1.min(1.0))?;
    let lo_alpha2 = density::lo(hyp.alpha2.min(1.0))?;
    let shape = lo_alpha * lo_alpha * lo_alpha1 * lo_alpha2;
    // L = lo(α / d·lo(α₁)lo(α₂)), argument clamped into lo's domain
    let l_arg = (alpha / (d.max(1) as f64 * lo_alpha1 * lo_alpha2)).clamp(1e-300, 1.0);
    let l = density::lo(l_arg)?;
    let size_log_ratio = if b3.len() == b_second.len() {
        Some(0.0)
    } else {
        Some(
            (b3.len() as f64 / b_second.len() as f64).ln() / (-l * (d as f64 + shape)),
        )
    };
    let rank3 = b3.rank();
    let bound = BoundReport {
        lo_alpha,
        lo_alpha1,
        lo_alpha2,
        ratio: (rank3.saturating_sub(d)) as f64 / shape,
        x_fraction: x.len() as f64 / domain.len() as f64,
        x_shape: (-(k as f64).powi(2) * lo_alpha1 * lo_alpha2 / (eps * eps)).exp(),
        size_log_ratio,
    };
    Ok(BootstrapResult {
        substrate: IncrementSubstrate::Bohr(b3),
        codim_or_rank: rank3,
        k_used: k,
        x,
        witness_sup,
        chain: ChainReport {
            inner_with_s,
            inner_with_corr,
            max_translation_defect: max_defect,
            smoothed_inner,
            linf_defect,
            fourier_mass,
        },
        bound,
    })
}

// ---------------------------------------------------------------------------
// Sifting oracle
// ---------------------------------------------------------------------------

/// Fraction of pairs (a₁, a₂) ∈ A₁×A₂ with a₁ − a₂ ∈ S; equals
/// ⟨μ_{A₁}∘μ_{A₂}, 1_S⟩ by direct summation.
pub fn pair_fraction(a1: &SubsetG, a2: &SubsetG, s: &SubsetG) -> f64 {
    if a1.is_empty() || a2.is_empty() {
        return 0.0;
    }
    let g = *a1.group();
    let mut hits = 0u64;
    for &x1 in a1.members() {
        for &x2 in a2.members() {
            if s.contains(g.sub(x1, x2)) {
                hits += 1;
            }
        }
    }
    hits as f64 / (a1.len() as f64 * a2.len() as f64)
}

/// The [BS]-style sifting step as a pluggable oracle: produces candidate
/// pairs A₁, A₂ (and a shift x) whose difference convolution concentrates
/// on S. Only `achieved` is guaranteed correct; whether the search reaches
/// 1−ε′ is the caller's gate.
pub fn sift(a: &SubsetG, s: &SubsetG, config: &SiftConfig) -> Result<SiftResult> {
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    let group = *a.group();
    let restrict = |cand: &SubsetG, dom: &Option<SubsetG>, x: Elem| -> Result<SubsetG> {
        match dom {
            None => Ok(cand.clone()),
            Some(d) => {
                // container D − x
                let members: Vec<Elem> = cand
                    .members()
                    .iter()
                    .copied()
                    .filter(|&y| d.contains(group.add(y, x)))
                    .collect();
                SubsetG::new(group, members)
            }
        }
    };
    let evaluate = |a1: &SubsetG, a2: &SubsetG| -> f64 { pair_fraction(a1, a2, s) };

    match config
        .strategy
        .as_ref()
        .ok_or_else(|| Error::Contract("sift needs a strategy".into()))?
    {
        SiftStrategy::Planted { a1, a2, shift } => {
            let achieved = evaluate(a1, a2);
            Ok(SiftResult {
                a1: a1.clone(),
                a2: a2.clone(),
                shift: *shift,
                achieved,
                alpha1: a1.density(),
                alpha2: a2.density(),
                strategy: "planted",
            })
        }
        SiftStrategy::Randomized { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut best: Option<SiftResult> = None;
            for trial in 0..(*trials).max(1) {
                let (sh1, sh2, x) = if trial == 0 {
                    (0, 0, 0)
                } else {
                    (
                        rng.gen_range(0..group.order()) as Elem,
                        rng.gen_range(0..group.order()) as Elem,
                        if config.domain2.is_some() {
                            rng.gen_range(0..group.order()) as Elem
                        } else {
                            0
                        },
                    )
                };
                let a1 = restrict(&a.shifted_intersect(sh1), &config.domain1, 0)?;
                let a2 = restrict(&a.shifted_intersect(sh2), &config.domain2, x)?;
                if a1.is_empty() || a2.is_empty() {
                    continue;
                }
                let achieved = evaluate(&a1, &a2);
                if best.as_ref().is_none_or(|b| achieved > b.achieved) {
                    best = Some(SiftResult {
                        alpha1: a1.density(),
                        alpha2: a2.density(),
                        a1,
                        a2,
                        shift: x,
                        achieved,
                        strategy: "randomized",
                    });
                }
            }
            best.ok_or_else(|| Error::Contract("no nonempty sift candidate".into()))
        }
        SiftStrategy::Exhaustive => {
            if group.order() > 1 << 10 {
                return Err(Error::Contract(
                    "exhaustive sift is capped at |G| ≤ 2^10".into(),
                ));
            }
            let mut best: Option<SiftResult> = None;
            for sh1 in group.elems() {
                let a1 = restrict(&a.shifted_intersect(sh1), &config.domain1, 0)?;
                if a1.is_empty() {
                    continue;
                }
                for sh2 in group.elems() {
                    let a2 = restrict(&a.shifted_intersect(sh2), &config.domain2, 0)?;
                    if a2.is_empty() {
                        continue;
                    }
                    let achieved = evaluate(&a1, &a2);
                    if best.as_ref().is_none_or(|b| achieved > b.achieved) {
                        best = Some(SiftResult {
                            alpha1: a1.density(),
                            alpha2: a2.density(),
                            a1: a1.clone(),
                            a2,
                            shift: 0,
                            achieved,
                            strategy: "exhaustive",
                        });
                    }
                }
            }
            best.ok_or_else(|| Error::Contract("no nonempty sift candidate".into()))
        }
    }
}

// ---------------------------------------------------------------------------
// The 𝔽_q^n increment step and its iteration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum FfqStepOutcome {
    /// |⟨μ_A∗μ_A, μ_C⟩ − 1| ≤ ε
    CountsMatch { value: f64 },
    Increment {
        bootstrap: Box<BootstrapResult>,
        sift: SiftResult,
        /// ‖1_A∗μ_V‖_∞, asserted ≥ (1+ε/64)·α
        witness_indicator: f64,
    },
}

/// The subspace dichotomy: either the A∗A-vs-C count is within ε of its
/// expectation, or a subspace density increment is produced through
/// S = {x : μ_A∘μ_A(x) ≥ 1+ε/8}, a 1−ε/32 sift, and the ε/32-scale
/// bootstrap.
pub fn increment_step_ffq(
    a: &SubsetG,
    c: &SubsetG,
    eps: f64,
    sift_config: &SiftConfig,
) -> Result<FfqStepOutcome> {
    let group = *a.group();
    let Some((q, _)) = group.qn() else {
        return Err(Error::UnsupportedKind("increment_step_ffq needs 𝔽_q^n"));
    };
    if q == 2 {
        return Err(Error::EvenOrder("the 3AP driver refuses q = 2"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("ε = {eps} outside (0,1)")));
    }
    if a.is_empty() || c.is_empty() {
        return Err(Error::EmptySet);
    }
    let mu_a = normalized_measure(a)?;
    let mu_c = normalized_measure(c)?;
    let a_hat = dft(&mu_a)?;
    let c_hat = dft(&mu_c)?;
    let ip: Complex64 = a_hat
        .values()
        .iter()
        .zip(c_hat.values().iter())
        .map(|(x, y)| x * x * y.conj())
        .sum();
    let ip = ip.re;
    if (ip - 1.0).abs() <= eps {
        return Ok(FfqStepOutcome::CountsMatch { value: ip });
    }

    let eps1 = eps / 32.0;
    let w = harmonic::diff_convolve(&mu_a, &mu_a)?;
    let s_members: Vec<Elem> = group
        .elems()
        .filter(|&x| w.at(x).re >= 1.0 + eps / 8.0)
        .collect();
    let s = SubsetG::new(group, s_members)?;
    if s.is_empty() {
        return Err(Error::SiftFailure {
            achieved: 0.0,
            required: 1.0 - eps1,
        });
    }
    let sifted = sift(a, &s, sift_config)?;
    if sifted.achieved < 1.0 - eps1 {
        return Err(Error::SiftFailure {
            achieved: sifted.achieved,
            required: 1.0 - eps1,
        });
    }
    let bootstrap = bootstrap_ffq(a, &sifted.a1, &sifted.a2, &s, eps1)?;
    let witness_indicator = a.density() * bootstrap.witness_sup;
    assert_ge(
        "‖1_A∗μ_V‖_∞ ≥ (1+ε/64)α",
        witness_indicator,
        (1.0 + eps / 64.0) * a.density(),
    )?;
    Ok(FfqStepOutcome::Increment {
        bootstrap: Box::new(bootstrap),
        sift: sifted,
        witness_indicator,
    })
}

/// One serialized record per pipeline step; the line-oriented JSON stream
/// uses exactly these fields.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct TraceStep {
    pub step: u32,
    pub kind: String,
    pub codim_or_rank: u64,
    pub k_used: u32,
    pub alpha: f64,
    pub witness: f64,
    pub bound_ratio: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceOutcome {
    CountsMatch,
    IncrementFound,
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct IncrementTrace {
    pub steps: Vec<TraceStep>,
    pub outcome: TraceOutcome,
}

/// Iterates the dichotomy, localizing to the incremented affine coset after
/// each increment: A ← (A−x₀) ∩ V and C ← (C−2x₀) ∩ V, re-coordinatized to
/// 𝔽_q^{dim V}; the shift 2x₀ keeps the progression count functional intact
/// on the coset triple (x₀+V, x₀+V, 2x₀+V). Densities along the trace grow
/// by ≥ 1+ε/64 per increment, so the step count is at most
/// ⌈log(1/α₀)/log(1+ε/64)⌉.
pub fn iterate_ffq(
    a: &SubsetG,
    c: &SubsetG,
    eps: f64,
    max_steps: u32,
    seed: u64,
) -> Result<IncrementTrace> {
    if max_steps < 1 {
        return Err(Error::Domain("need max_steps >= 1".into()));
    }
    let mut cur_a = a.clone();
    let mut cur_c = c.clone();
    let mut steps = Vec::new();
    for step in 0..max_steps {
        let group = *cur_a.group();
        let cfg = SiftConfig {
            strategy: Some(if group.order() <= 1 << 10 {
                SiftStrategy::Exhaustive
            } else {
                SiftStrategy::Randomized {
                    trials: 200,
                    seed: seed.wrapping_add(step as u64),
                }
            }),
            ..SiftConfig::default()
        };
        let alpha = cur_a.density();
        match increment_step_ffq(&cur_a, &cur_c, eps, &cfg)? {
            FfqStepOutcome::CountsMatch { value } => {
                steps.push(TraceStep {
                    step,
                    kind: "counts-match".into(),
                    codim_or_rank: 0,
                    k_used: 0,
                    alpha,
                    witness: value,
                    bound_ratio: 0.0,
                    seed,
                });
                return Ok(IncrementTrace {
                    steps,
                    outcome: TraceOutcome::CountsMatch,
                });
            }
            FfqStepOutcome::Increment {
                bootstrap,
                witness_indicator,
                ..
            } => {
                let IncrementSubstrate::Subspace(v) = &bootstrap.substrate else {
                    unreachable!("ffq step yields subspaces");
                };
                steps.push(TraceStep {
                    step,
                    kind: "increment".into(),
                    codim_or_rank: bootstrap.codim_or_rank as u64,
                    k_used: bootstrap.k_used,
                    alpha,
                    witness: bootstrap.witness_sup,
                    bound_ratio: bootstrap.bound.ratio,
                    seed,
                });
                // localize to the densest coset of V
                let ind_conv = harmonic::convolve(
                    &cur_a.indicator(),
                    &normalized_measure(&SubsetG::new(group, v.elements(&group))?)?,
                )?;
                let mut x0 = 0 as Elem;
                let mut best = f64::NEG_INFINITY;
                for x in group.elems() {
                    let val = ind_conv.at(x).re;
                    if val > best + 1e-12 {
                        best = val;
                        x0 = x;
                    }
                }
                assert_ge(
                    "localized density ≥ (1+ε/64)α",
                    best,
                    (1.0 + eps / 64.0) * alpha,
                )?;
                debug_assert!((best - witness_indicator).abs() < 1e-9);
                if v.dim() == 0 {
                    return Ok(IncrementTrace {
                        steps,
                        outcome: TraceOutcome::IncrementFound,
                    });
                }
                let (q, _) = group.qn().expect("vector space");
                let sub_group = Group::vector_space(q, v.dim() as u32)?;
                let basis_idx: Vec<Elem> =
                    v.basis().iter().map(|b| group.encode(b)).collect();
                let embed = |y: Elem| -> Elem {
                    let digits = sub_group.decode(y);
                    let mut acc = 0 as Elem;
                    for (d, &b) in digits.iter().zip(basis_idx.iter()) {
                        acc = group.add(acc, group.scale(*d as u64, b));
                    }
                    acc
                };
                let mut new_a = Vec::new();
                let mut new_c = Vec::new();
                let x0_twice = group.add(x0, x0);
                for y in sub_group.elems() {
                    let img = embed(y);
                    if cur_a.contains(group.add(x0, img)) {
                        new_a.push(y);
                    }
                    if cur_c.contains(group.add(x0_twice, img)) {
                        new_c.push(y);
                    }
                }
                cur_a = SubsetG::new(sub_group, new_a)?;
                if new_c.is_empty() {
                    // the increment is real but the count functional has no
                    // mass left on the target coset
                    return Ok(IncrementTrace {
                        steps,
                        outcome: TraceOutcome::IncrementFound,
                    });
                }
                cur_c = SubsetG::new(sub_group, new_c)?;
            }
        }
    }
    Ok(IncrementTrace {
        steps,
        outcome: TraceOutcome::Exhausted,
    })
}

// ---------------------------------------------------------------------------
// Single integer step
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum IntStepOutcome {
    /// ‖μ_A∘μ_A‖_{p(ν)} < (1+ε)μ(B)⁻¹
    NoViolation { norm: f64 },
    Increment {
        bootstrap: Box<BootstrapResult>,
        sift: SiftResult,
        norm: f64,
    },
}

/// Single density-increment step relative to regular Bohr sets B ⊇ A with
/// auxiliary B′, B″: tests the weighted norm of μ_A∘μ_A against
/// ν = μ_{k·B′}∘μ_{k·B′}∗μ_{k·B″}∘μ_{k·B″}, and on violation sifts
/// A₁ ⊆ k·B′, A₂ ⊆ k·B″−x over S = {x ∈ A₁−A₂ : μ_A∘μ_A ≥ (1+ε/2)μ(B)⁻¹}
/// and runs the Bohr bootstrap at scale ε/4, so the conclusion lands at
/// ‖μ_{B‴}∗μ_A‖_∞ ≥ (1+ε/16)μ(B)⁻¹.
#[allow(clippy::too_many_arguments)]
pub fn increment_step_int(
    a: &SubsetG,
    b: &BohrSet,
    b_prime: &BohrSet,
    b_second: &BohrSet,
    p: u32,
    k_dilate: u64,
    eps: f64,
    sift_config: &SiftConfig,
) -> Result<IntStepOutcome> {
    let group = *a.group();
    let n = match group.kind() {
        GroupKind::Cyclic { n } => n,
        _ => return Err(Error::UnsupportedKind("increment_step_int needs ℤ/N")),
    };
    if gcd(k_dilate % n, n) != 1 {
        return Err(Error::InvalidDilate { k: k_dilate, n });
    }
    if p < 1 {
        return Err(Error::Domain("need p >= 1".into()));
    }
    if !(eps > 0.0 && eps < 0.4) {
        return Err(Error::Domain(format!(
            "ε = {eps} outside (0, 2/5); the bootstrap scale ε/4 must be in (0,1/10)"
        )));
    }
    for (name, set) in [("B", b), ("B′", b_prime), ("B″", b_second)] {
        if set.regularity() != Regularity::VerifiedRegular {
            return Err(Error::Contract(format!("{name} is not verified-regular")));
        }
    }
    if !a.members().iter().all(|&x| b.contains(x)) {
        return Err(Error::Contract("A ⊄ B".into()));
    }
    // B″ ⊆ B′_{c/d}: the width fraction 1/(100d) keeps |B′+B″| ≤ 2|B′| by
    // regularity of B′ at the grid edge κ = 1/(100d)
    let d_prime = b_prime.rank();
    let b_prime_shrunk = bohr::shrink(b_prime, 1.0 / (100.0 * d_prime.max(1) as f64))?;
    if !b_second.elements().members().iter().all(|&x| b_prime_shrunk.contains(x)) {
        return Err(Error::Contract("B″ ⊄ B′ shrunk by 1/100d".into()));
    }

    let kbp = bohr::dilate_bohr(k_dilate, b_prime)?;
    let kbpp = bohr::dilate_bohr(k_dilate, b_second)?;
    let mu_kbp = normalized_measure(kbp.elements())?;
    let mu_kbpp = normalized_measure(kbpp.elements())?;
    let nu = harmonic::convolve(
        &harmonic::diff_convolve(&mu_kbp, &mu_kbp)?,
        &harmonic::diff_convolve(&mu_kbpp, &mu_kbpp)?,
    )?;
    let mu_a = normalized_measure(a)?;
    let w = harmonic::diff_convolve(&mu_a, &mu_a)?;
    let norm = harmonic::weighted_norm(&w, p, &nu)?;
    let mu_b_inv = 1.0 / b.mu();
    if norm < (1.0 + eps) * mu_b_inv {
        return Ok(IntStepOutcome::NoViolation { norm });
    }

    let s0_members: Vec<Elem> = group
        .elems()
        .filter(|&x| w.at(x).re >= (1.0 + eps / 2.0) * mu_b_inv)
        .collect();
    let s0 = SubsetG::new(group, s0_members)?;
    if s0.is_empty() {
        return Err(Error::SiftFailure {
            achieved: 0.0,
            required: 1.0 - eps / 4.0,
        });
    }
    let mut cfg = sift_config.clone();
    if cfg.domain1.is_none() {
        cfg.domain1 = Some(kbp.elements().clone());
    }
    if cfg.domain2.is_none() {
        cfg.domain2 = Some(kbpp.elements().clone());
    }
    let sifted = sift(a, &s0, &cfg)?;
    if sifted.achieved < 1.0 - eps / 4.0 {
        return Err(Error::SiftFailure {
            achieved: sifted.achieved,
            required: 1.0 - eps / 4.0,
        });
    }
    // restrict S to A₁ − A₂; the difference convolution is supported there,
    // so the achieved inner product is unchanged
    let mut diff_members: Vec<Elem> = Vec::new();
    for &x1 in sifted.a1.members() {
        for &x2 in sifted.a2.members() {
            diff_members.push(group.sub(x1, x2));
        }
    }
    let s = s0.intersect(&SubsetG::new(group, diff_members)?)?;

    let bootstrap = bootstrap_bohr(
        a,
        &sifted.a1,
        &sifted.a2,
        sifted.shift,
        &s,
        b,
        &kbp,
        &kbpp,
        eps / 4.0,
    )?;
    // (1 + (ε/4)/4)μ(B)⁻¹ = (1+ε/16)μ(B)⁻¹, the step's stated conclusion
    let conclusion = bootstrap.witness_sup * mu_b_inv;
    if conclusion < (1.0 + eps / 16.0) * mu_b_inv - SLACK * mu_b_inv.max(1.0) {
        return Err(Error::AssertionFailed {
            name: "‖μ_B‴∗μ_A‖_∞ ≥ (1+ε/16)μ(B)⁻¹",
            value: conclusion,
            bound: (1.0 + eps / 16.0) * mu_b_inv,
        });
    }
    Ok(IntStepOutcome::Increment {
        bootstrap: Box::new(bootstrap),
        sift: sifted,
        norm,
    })
}

// ---------------------------------------------------------------------------
// Planted Bohr fixtures
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PlantedBohrInstance {
    pub a: SubsetG,
    pub a1: SubsetG,
    pub a2: SubsetG,
    pub s: SubsetG,
    pub b: BohrSet,
    pub b_prime: BohrSet,
    pub b_second: BohrSet,
    pub shift: Elem,
    pub seed_used: u64,
}

/// Planted fixture for the Bohr bootstrap: A is a T-spaced union of short
/// intervals inside a regular rank ≤ 2 ambient Bohr set (so μ_A∘μ_A piles
/// up on small differences), A₁ = A₂ is the central interval, and
/// S = {x : μ_A∘μ_A(x) ≥ (1+2ε)μ(B)⁻¹}. Hypotheses are verified before an
/// instance is returned; seeds retry up to 100 times.
pub fn planted_bohr_instance(
    group: Group,
    rank: usize,
    eps: f64,
    seed: u64,
) -> Result<PlantedBohrInstance> {
    let n = match group.kind() {
        GroupKind::Cyclic { n } => n,
        _ => {
            return Err(Error::UnsupportedKind(
                "planted_bohr_instance needs a cyclic group",
            ))
        }
    };
    if rank > 2 {
        return Err(Error::Domain("planted ambient rank ≤ 2".into()));
    }
    if !(eps > 0.0 && eps < 0.1) {
        return Err(Error::Domain("need ε ∈ (0, 1/10)".into()));
    }
    let mut last_reason = String::new();
    for attempt in 0..100u64 {
        let seed_used = seed.wrapping_add(attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(seed_used);
        let ambient = match rank {
            0 => BohrSet::full(group)?,
            1 => bohr::find_regular(&bohr::bohr_set(group, &[1], 1.9)?)?,
            _ => {
                let f = rng.gen_range(2..(n as u32 - 1));
                bohr::find_regular(&bohr::bohr_set(group, &[1, f], 1.9)?)?
            }
        };
        let h: u64 = 1;
        let span = 2 * h + 1;
        // block count: enough room that μ_A∘μ_A clears the threshold across
        // all of A₁−A₂ with margin 1.6; more blocks also means flatter
        // translation defects along the grid, hence a nontrivial period set
        let m_max = (ambient.len() as f64 / ((1.0 + 2.0 * eps) * (span * span) as f64 * 1.6))
            .floor() as u64;
        let m = m_max.max(4) - (attempt % 3);
        let t_spacing = n / m;
        let mut members: Vec<Elem> = Vec::new();
        for j in 0..m {
            let center = (j * t_spacing) % n;
            for r in 0..span {
                let x = ((center + n + r - h) % n) as Elem;
                if ambient.contains(x) {
                    members.push(x);
                }
            }
        }
        let Ok(a) = SubsetG::new(group, members) else {
            continue;
        };
        if a.is_empty() {
            last_reason = "empty planted A".into();
            continue;
        }
        let a1_members: Vec<Elem> = (0..span)
            .map(|r| ((n + r - h) % n) as Elem)
            .filter(|&x| ambient.contains(x))
            .collect();
        let Ok(a1) = SubsetG::new(group, a1_members) else {
            continue;
        };
        if a1.is_empty() {
            last_reason = "empty planted A₁".into();
            continue;
        }
        let a2 = a1.clone();

        let mu_a = normalized_measure(&a)?;
        let w = harmonic::diff_convolve(&mu_a, &mu_a)?;
        let thr = (1.0 + 2.0 * eps) / ambient.mu();
        let s_members: Vec<Elem> = group.elems().filter(|&x| w.at(x).re >= thr).collect();
        let Ok(s) = SubsetG::new(group, s_members) else {
            continue;
        };
        if s.is_empty() {
            last_reason = "level set S empty".into();
            continue;
        }
        let hyp = check_hypotheses(
            &a,
            &a1,
            &a2,
            &s,
            eps,
            Ambient::Bohr {
                b: &ambient,
                b_prime: &ambient,
                b_second: &ambient,
            },
        );
        match hyp {
            Ok(h) if h.ok => {
                return Ok(PlantedBohrInstance {
                    a,
                    a1,
                    a2,
                    s,
                    b: ambient.clone(),
                    b_prime: ambient.clone(),
                    b_second: ambient,
                    shift: 0,
                    seed_used,
                });
            }
            Ok(h) => {
                last_reason = format!(
                    "hypotheses failed: inner {} min_corr {}",
                    h.inner_product, h.min_corr_on_s
                );
            }
            Err(e) => {
                last_reason = format!("hypothesis check error: {e}");
            }
        }
    }
    Err(Error::GenerationFailure {
        retries: 100,
        reason: last_reason,
    })
}
