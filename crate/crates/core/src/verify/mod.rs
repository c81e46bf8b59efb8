//! Randomized, exact verification campaigns.
//!
//! A campaign draws one instance per trial from a sub-seed of the campaign
//! seed, evaluates the law on it and records every inequality it asserted.
//! Trials run in parallel; records are merged in trial order, so a report
//! depends only on `(law, trials, seed, params)`.

pub mod generator;
mod laws;
mod report;
pub mod worked;

use rand::Rng;
use rayon::prelude::*;

pub use generator::{generate_instance, generate_rewards, sub_seeds, GeneratorParams, KindChoice};
pub use laws::{constant_policy, evaluate, ratio_spec, Evaluation};
pub use report::{
    digest, Counterexample, Inequality, Law, TrialRecord, TrialSpec, Verdict, VerificationReport,
};

use crate::error::{Error, Result};
use crate::format::{instance_from_value, instance_value};
use crate::model::{Budget, Instance};
use crate::{rat, Rational};

/// Scales tried by the agreement campaign, cycled by trial index.
pub fn lemma1_scales() -> [Rational; 5] {
    [rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)]
}

/// Generator settings each campaign uses unless told otherwise.
pub fn default_params(law: Law) -> GeneratorParams {
    let base = GeneratorParams::default();
    match law {
        Law::K => base,
        Law::Polymatroid => GeneratorParams {
            kinds: vec![KindChoice::Polymatroid, KindChoice::OnlinePolymatroid],
            ..base
        },
        Law::Correlated => GeneratorParams {
            n_min: 2,
            joint: true,
            ..base
        },
        Law::Minkowski => GeneratorParams {
            n_max: 3,
            kinds: vec![KindChoice::Minkowski],
            ..base
        },
        Law::Lemmas234 => GeneratorParams {
            n_min: 2,
            kinds: vec![KindChoice::OnlinePolymatroid],
            ..base
        },
        Law::Lemma1 => GeneratorParams {
            n_min: 2,
            kinds: vec![
                KindChoice::Matrix,
                KindChoice::Polymatroid,
                KindChoice::OnlinePolymatroid,
                KindChoice::Minkowski,
            ],
            ..base
        },
    }
}

/// The instance and parameters of trial `index`, drawn from `seed`.
pub fn draw_trial(
    law: Law,
    index: usize,
    seed: u64,
    params: &GeneratorParams,
) -> Result<(Instance, TrialSpec)> {
    let params = GeneratorParams {
        seed,
        ..params.clone()
    };
    let mut spec = TrialSpec::new(law);
    let instance = match law {
        Law::Minkowski if index == 0 => Instance::new(
            generate_rewards(&GeneratorParams { joint: false, ..params }, 3)?,
            worked::permutahedron3(),
        )?,
        _ => generate_instance(&params)?,
    };
    match law {
        Law::Lemma1 => {
            spec.lambda = Some(lemma1_scales()[index % 5].clone());
        }
        Law::Lemmas234 => {
            let mut rng = generator::rng_for(seed);
            rng.set_stream(2);
            let top = (instance.n() - 1).min(3);
            let i = rng.gen_range(0..=top);
            spec.stage = Some(i);
            spec.candidate = Some(rng.gen_range(0..instance.rewards.support(i).len()));
        }
        _ => {}
    }
    Ok((instance, spec))
}

fn record(
    index: usize,
    seed: u64,
    instance: &Instance,
    spec: &TrialSpec,
    ev: Evaluation,
) -> TrialRecord {
    let counterexample = ev.first_violation().map(|violated| Counterexample {
        instance: instance_value(instance),
        spec: spec.clone(),
        violated: violated.clone(),
    });
    let kind = if instance.rewards.is_independent() {
        instance.constraints.kind().to_string()
    } else {
        format!("{}/joint", instance.constraints.kind())
    };
    TrialRecord {
        law: spec.law,
        index,
        seed,
        digest: digest(instance),
        n: instance.n(),
        kind,
        k: instance.constraints.row_count(),
        margin: ev.margin(),
        z_off: ev.z_off,
        z_on: ev.z_on,
        factor: ev.factor,
        implementable: ev.implementable,
        verdict: ev.verdict,
        checks: ev.checks,
        counterexample,
        note: ev.note,
    }
}

/// Evaluates one trial and wraps it into a record.
pub fn run_trial(index: usize, seed: u64, instance: &Instance, spec: &TrialSpec) -> Result<TrialRecord> {
    let ev = evaluate(instance, spec)?;
    Ok(record(index, seed, instance, spec, ev))
}

/// Per-trial sub-seeds of a campaign; trial `i` of `run_campaign(law, _, seed, _)` uses entry `i`.
pub fn trial_seeds(law: Law, seed: u64, trials: usize) -> Vec<u64> {
    sub_seeds(seed, law.stream(), trials)
}

/// Runs `trials` trials of `law`. A trial that errors aborts the campaign:
/// errors are bugs or refusals, never verdicts.
pub fn run_campaign(
    law: Law,
    trials: usize,
    seed: u64,
    params: &GeneratorParams,
) -> Result<VerificationReport> {
    params.validate()?;
    let seeds = trial_seeds(law, seed, trials);
    let records = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &s)| {
            let (instance, spec) = draw_trial(law, index, s, params)?;
            run_trial(index, s, &instance, &spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let params = serde_json::to_value(params).expect("parameters serialize");
    Ok(VerificationReport::new(law, seed, params, records))
}

/// Trial on an explicit instance asserting `Z_on ≥ factor · Z_off`.
pub fn check_ratio(instance: &Instance, factor: Rational) -> Result<TrialRecord> {
    run_trial(0, 0, instance, &ratio_spec(instance, factor))
}

/// Replays a counterexample from its payload alone and confirms that the
/// recorded inequality comes out identical and still fails.
pub fn recheck(cx: &Counterexample) -> Result<bool> {
    let instance = instance_from_value(cx.instance.clone(), Budget::default())?;
    let ev = evaluate(&instance, &cx.spec)?;
    let replayed = ev
        .checks
        .iter()
        .find(|c| c.label == cx.violated.label)
        .ok_or_else(|| {
            Error::Structural(format!("replay did not assert {:?}", cx.violated.label))
        })?;
    Ok(*replayed == cx.violated && !replayed.holds())
}
