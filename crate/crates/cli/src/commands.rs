use std::collections::BTreeMap;
use std::fs;

use aclr::benchmark::{fit_error_relation, lambda_sweep};
use aclr::chrono::{self, decode_with_key, encode_secret, parse_bits, SecretKey};
use aclr::evolution::{dymarsky_state, observable_series, thermal_reservoir_state};
use aclr::io::{self, RevivalFile};
use aclr::revival::{build_revival, build_revival_with, predicted_high_spin_value, superpose_revivals, RevivalOptions};
use aclr::spectra::{self, chain_momentum_sectors, reflection_symmetric_momenta, Histogram};
use aclr::{rng, ChainSpec, Complex64, EigenSystem, SpinProbe};
use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{write, write_manifest, write_series};

fn spec_json(spec: &ChainSpec) -> Value {
    serde_json::to_value(spec).expect("spec serializes")
}

fn diagnose(eig: &EigenSystem) {
    log::info!("diagonalized dimension {}", eig.dim());
}

fn system(chain: &ChainArgs) -> Result<(ChainSpec, EigenSystem, SpinProbe)> {
    let spec = chain.spec()?;
    let probe = SpinProbe::new(&spec)?;
    let eig = EigenSystem::for_spec(&spec)?;
    diagnose(&eig);
    Ok((spec, eig, probe))
}

pub fn thermal(a: &ThermalArgs) -> Result<()> {
    let (spec, eig, probe) = system(&a.chain)?;
    let site = spec.revival_site();
    let state = thermal_reservoir_state(&eig, probe.basis(), site, &mut rng::seeded(a.seed))?;
    let series = observable_series(&eig, &probe, &state, site, &a.times.times.points())?;
    let file = write_series(&a.out.out, "thermal", &series, a.out.format)?;
    write_manifest(
        &a.out.out,
        "thermal",
        json!({ "spec": spec_json(&spec), "seed": a.seed, "times": grid_json(&a.times.times) }),
        json!({
            "series": file,
            "energy": eig.energy(&state)?,
            "spectral_width": eig.spectral_width(),
        }),
    )
}

fn grid_json(g: &io::TimeGrid) -> Value {
    json!({ "start": g.start, "stop": g.stop, "step": g.step })
}

pub fn revive(a: &ReviveArgs) -> Result<()> {
    let (spec, eig, probe) = system(&a.chain)?;
    let options = RevivalOptions {
        designated_row: a.designated_row,
        ..RevivalOptions::default()
    };
    let c = build_revival_with(&eig, a.t_star, &spec, &options)?;
    let site = spec.revival_site();
    let series = observable_series(&eig, &probe, &c.state, site, &a.times.times.points())?;
    let file = write_series(&a.out.out, "revive", &series, a.out.format)?;
    write(
        &a.out.out,
        "revival.json",
        &RevivalFile::from_construction(&c)?.to_json()?,
    )?;
    let value = probe.sz(&eig.evolve(&c.state, c.t_star)?, site)?;
    write_manifest(
        &a.out.out,
        "revive",
        json!({
            "spec": spec_json(&spec),
            "t_star": a.t_star,
            "designated_row": a.designated_row,
            "times": grid_json(&a.times.times),
        }),
        json!({
            "series": file,
            "state": "revival.json",
            "xi": c.xi,
            "predicted_value": c.predicted_value,
            "value_at_t_star": value,
            "residual": c.residual,
            "condition_estimate": c.condition_estimate,
            "block_error": c.block_error,
            "overlap_at_t_star": c.overlap_at_tstar,
            "leaked_norm": c.leaked_norm,
            "designated_index": c.designated_index,
        }),
    )
}

pub fn superpose(a: &SuperposeArgs) -> Result<()> {
    let (spec, eig, probe) = system(&a.chain)?;
    let constructions = a
        .t_stars
        .iter()
        .map(|&t| build_revival(&eig, t, &spec))
        .collect::<aclr::Result<Vec<_>>>()?;
    let weights = vec![Complex64::new(1.0, 0.0); constructions.len()];
    let sup = superpose_revivals(&constructions, &weights)?;
    let site = spec.revival_site();
    let series = observable_series(&eig, &probe, &sup.state, site, &a.times.times.points())?;
    let file = write_series(&a.out.out, "superpose", &series, a.out.format)?;
    let values = a
        .t_stars
        .iter()
        .map(|&t| probe.sz(&eig.evolve(&sup.state, t)?, site))
        .collect::<aclr::Result<Vec<_>>>()?;
    let overlaps: Vec<Vec<f64>> = sup
        .overlaps
        .iter()
        .map(|r| r.iter().map(|z| z.norm()).collect())
        .collect();
    write_manifest(
        &a.out.out,
        "superpose",
        json!({ "spec": spec_json(&spec), "t_stars": a.t_stars, "times": grid_json(&a.times.times) }),
        json!({
            "series": file,
            "values_at_t_stars": values,
            "xi": constructions.iter().map(|c| c.xi).collect::<Vec<_>>(),
            "overlap_magnitudes": overlaps,
        }),
    )
}

pub fn higher_spin(a: &HigherSpinArgs) -> Result<()> {
    if a.two_s_list.len() != a.lengths.len() {
        bail!(
            "--two-s-list has {} entries but --lengths has {}",
            a.two_s_list.len(),
            a.lengths.len()
        );
    }
    let specs = a
        .two_s_list
        .iter()
        .zip(&a.lengths)
        .map(|(&two_s, &length)| a.chain.spec_with(length, two_s))
        .collect::<aclr::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for spec in &specs {
        let probe = SpinProbe::new(spec)?;
        let eig = EigenSystem::for_spec(spec)?;
        diagnose(&eig);
        let c = build_revival(&eig, a.t_star, spec)?;
        let site = spec.revival_site();
        let series = observable_series(&eig, &probe, &c.state, site, &a.times.times.points())?;
        let file = write_series(
            &a.out.out,
            &format!("spin_2s{}_L{}", spec.two_s(), spec.length()),
            &series,
            a.out.format,
        )?;
        rows.push(json!({
            "spec": spec_json(spec),
            "series": file,
            "value_at_t_star": probe.sz(&eig.evolve(&c.state, a.t_star)?, site)?,
            "predicted_value": c.predicted_value,
            "asymptote": predicted_high_spin_value(spec.two_s())?,
            "xi": c.xi,
            "condition_estimate": c.condition_estimate,
        }));
    }
    write_manifest(
        &a.out.out,
        "higher-spin",
        json!({
            "two_s": a.two_s_list,
            "lengths": a.lengths,
            "t_star": a.t_star,
            "times": grid_json(&a.times.times),
            "couplings": spec_json(&specs[0]),
        }),
        json!({ "runs": rows }),
    )
}

pub fn dymarsky(a: &DymarskyArgs) -> Result<()> {
    let (spec, eig, probe) = system(&a.chain)?;
    let site = spec.revival_site();
    let psi0 = thermal_reservoir_state(&eig, probe.basis(), site, &mut rng::seeded(a.seed))?;
    let state = dymarsky_state(&eig, &psi0, a.t_star)?;
    let series = observable_series(&eig, &probe, &state, site, &a.times.times.points())?;
    let file = write_series(&a.out.out, "dymarsky", &series, a.out.format)?;
    write_manifest(
        &a.out.out,
        "dymarsky",
        json!({
            "spec": spec_json(&spec),
            "t_star": a.t_star,
            "seed": a.seed,
            "times": grid_json(&a.times.times),
        }),
        json!({
            "series": file,
            "value_at_0": probe.sz(&state, site)?,
            "value_at_t_star": probe.sz(&eig.evolve(&state, a.t_star)?, site)?,
        }),
    )
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let (spec, eig, _) = system(&a.chain)?;
    let c = build_revival(&eig, a.t_star, &spec)?;
    let result = lambda_sweep(&eig, &c, &a.lambdas, a.realizations as usize, a.seed)?;
    let csv = io::csv_table(
        &["lambda", "mean_sz", "stderr_sz", "mean_E", "n"],
        result.points.iter().map(|p| {
            vec![
                p.lambda,
                p.mean_revival,
                p.stderr_revival,
                p.mean_preparation_error,
                p.n_realizations as f64,
            ]
        }),
    );
    write(&a.out.out, "sweep.csv", &csv)?;
    let fit = match fit_error_relation(&result) {
        Ok(f) => json!({
            "slope": f.slope,
            "intercept": f.intercept,
            "r2": f.r_squared,
            "region": [f.region.0, f.region.1],
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    write(&a.out.out, "fit.json", &io::pretty_json(&fit)?)?;
    write_manifest(
        &a.out.out,
        "sweep",
        json!({
            "spec": spec_json(&spec),
            "t_star": a.t_star,
            "realizations": a.realizations,
            "lambdas": a.lambdas,
            "seed": a.seed,
        }),
        json!({ "table": "sweep.csv", "fit": "fit.json", "xi": c.xi }),
    )
}

pub fn spectra(a: &SpectraArgs) -> Result<()> {
    let spec = a.chain.spec()?;
    let sectors = chain_momentum_sectors(&spec)?;
    let mut csv = String::from("k,level\n");
    for s in &sectors {
        for &e in &s.levels {
            csv.push_str(&format!("{},{}\n", s.momentum, io::format_sig(e, 12)));
        }
    }
    write(&a.out.out, "spectra.csv", &csv)?;

    let excluded = reflection_symmetric_momenta(spec.length());
    let pooled = spectra::pooled_ratios(&sectors, &excluded)?;
    let per_sector: BTreeMap<String, Value> = sectors
        .iter()
        .map(|s| {
            let v = match spectra::ratio_values(&s.levels) {
                Ok(r) if !r.r_values.is_empty() => json!(r.mean_r),
                _ => Value::Null,
            };
            (s.momentum.to_string(), v)
        })
        .collect();
    let unfolded = spectra::pooled_unfolded_spacings(&sectors, &excluded, a.degree)?;
    let spacing = if unfolded.is_empty() {
        Value::Null
    } else {
        let hist = Histogram::new(&unfolded, 50, 5.0);
        json!({
            "n": unfolded.len(),
            "mean": unfolded.iter().sum::<f64>() / unfolded.len() as f64,
            "fraction_0.5_1.5": hist.fraction_between(0.5, 1.5, unfolded.len()),
            "histogram": hist,
        })
    };
    let rstats = json!({
        "mean_r": pooled.mean_r,
        "n_ratios": pooled.r_values.len(),
        "excluded_degenerate": pooled.excluded,
        "excluded_momenta": excluded,
        "per_sector": per_sector,
        "unfolded_spacings": spacing,
    });
    write(&a.out.out, "rstats.json", &io::pretty_json(&rstats)?)?;
    write_manifest(
        &a.out.out,
        "spectra",
        json!({ "spec": spec_json(&spec), "degree": a.degree }),
        json!({ "levels": "spectra.csv", "statistics": "rstats.json", "mean_r": pooled.mean_r }),
    )
}

pub fn keygen(a: &KeygenArgs) -> Result<()> {
    let spec = a.chain.spec()?;
    let key = SecretKey::random(spec, a.q, a.t_min, a.t_max, &mut rng::seeded(a.seed))?.with_copies(a.copies)?;
    let key = SecretKey::with_options(key.spec().clone(), key.entries().to_vec(), a.copies, a.threshold)?;
    write(&a.out.out, "key.json", &(io::key_to_json(&key)? + "\n"))
}

fn read(path: &std::path::Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn encode(a: &EncodeArgs) -> Result<()> {
    let key = io::key_from_json(&read(&a.key)?, a.cap.max_dim)?;
    let bits = parse_bits(&a.bits)?;
    if bits.len() != key.len() {
        bail!("{} bits given but the key has {} entries", bits.len(), key.len());
    }
    let eig = EigenSystem::for_spec(key.spec())?;
    diagnose(&eig);
    let book = encode_secret(&bits, &key, &eig, a.seed)?;
    write(&a.out.out, "codebook.json", &io::codebook_to_json(key.spec(), &book)?)?;
    write_manifest(
        &a.out.out,
        "encode",
        json!({ "spec": spec_json(key.spec()), "seed": a.seed, "devices": key.len() }),
        json!({ "codebook": "codebook.json" }),
    )
}

pub fn decode(a: &DecodeArgs) -> Result<()> {
    let key = io::key_from_json(&read(&a.key)?, a.cap.max_dim)?;
    let (book_spec, book) = io::codebook_from_json(&read(&a.book.join("codebook.json"))?, a.cap.max_dim)?;
    if book_spec != *key.spec() {
        bail!("codebook and key describe different chains");
    }
    let eig = EigenSystem::for_spec(key.spec())?;
    diagnose(&eig);
    let decoded = decode_with_key(&book, &key, &eig, a.seed)?;
    let bits = chrono::format_bits(&decoded.bits);
    println!("{bits}");
    write(
        &a.out.out,
        "decoded.json",
        &io::pretty_json(&json!({
            "bits": bits,
            "per_bit_estimate": decoded.per_bit_estimate,
            "per_bit_stderr": decoded.per_bit_stderr,
            "seed": a.seed,
            "n_copies": key.n_copies(),
            "threshold": key.threshold(),
        }))?,
    )
}
