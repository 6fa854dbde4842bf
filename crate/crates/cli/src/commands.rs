use std::f64::consts::PI;
use std::path::Path;

use noonsi::calibration::{calibrate_along_bandwidth, CalibrationOptions};
use noonsi::config::{RunConfig, SourceModel};
use noonsi::diff::diff_files;
use noonsi::instrument::{acquire, blur_channels, resolution, SpectrometerSpec};
use noonsi::interference::{
    carrier_period, count_lobes, delay_at_phase, fringe_orientation, jsi_of, lobe_count, noon_jsi,
    visibility, InterferenceKind, Interferometer, JsiMap, LobeAxis, LobeOptions,
};
use noonsi::io::{
    read_jsi_csv, write_arrival_map_csv, write_histogram_csv, write_jsa_csv, write_jsi_csv,
    write_pgm, write_scan_csv,
};
use noonsi::{Error, Result};

use crate::context::Context;
use crate::scenarios;
use crate::{Command, CommonArgs, Format};

/// Minimum radius of the fringe search in the 2-D spectrum, cycles per map
/// width; excludes the envelope.
pub const ORIENTATION_MIN_RADIUS: f64 = 2.0;

/// Run one subcommand. `Ok(false)` means a comparison failed (exit 1).
pub fn run(common: &CommonArgs, command: &Command) -> Result<bool> {
    if let Command::Diff {
        a,
        b,
        tolerance,
        floor,
    } = command
    {
        let report = diff_files(a, b, *tolerance, *floor)?;
        println!("{}", report.summary());
        return Ok(report.passed());
    }
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let mut ctx = Context::new(common, argv.join(" "))?;
    match command {
        Command::Jsa => jsa(&mut ctx)?,
        Command::Scan {
            kind,
            start,
            stop,
            step,
        } => match (start, stop, step) {
            (Some(a), Some(b), Some(s)) => custom_scan(&mut ctx, (*kind).into(), *a, *b, *s)?,
            _ => match InterferenceKind::from(*kind) {
                InterferenceKind::Noon => {
                    scenarios::envelope(&mut ctx)?;
                    scenarios::fine_scans(&mut ctx)?;
                }
                InterferenceKind::Hom => {
                    let s = ctx.cfg.scan.clone();
                    custom_scan(
                        &mut ctx,
                        InterferenceKind::Hom,
                        s.envelope_start_ps,
                        s.envelope_stop_ps,
                        s.envelope_step_ps,
                    )?
                }
            },
        },
        Command::Jsi {
            delay,
            phase_over_pi,
            kind,
        } => jsi(&mut ctx, *delay, *phase_over_pi, (*kind).into())?,
        Command::Fisher => scenarios::fisher_comparison(&mut ctx)?,
        Command::Estimate {
            mode,
            trials,
            events,
            delay,
        } => {
            let e = &mut ctx.cfg.estimation;
            if !mode.is_empty() {
                e.modes = mode.iter().map(|&m| m.into()).collect();
            }
            e.n_trials = trials.unwrap_or(e.n_trials);
            e.n_events = events.unwrap_or(e.n_events);
            e.true_delay_ps = delay.unwrap_or(e.true_delay_ps);
            ctx.cfg.validate()?;
            scenarios::estimation_study(&mut ctx)?;
        }
        Command::Instrument {
            jsi,
            duration_s,
            rate_cps,
        } => {
            let a = &mut ctx.cfg.acquisition;
            a.duration_s = duration_s.unwrap_or(a.duration_s);
            a.pair_rate_cps = rate_cps.unwrap_or(a.pair_rate_cps);
            ctx.cfg.validate()?;
            instrument(&mut ctx, jsi.as_deref())?;
        }
        Command::Calibrate {
            target_fwhm_ps,
            scan_step_ps,
            tolerance,
        } => calibrate(&mut ctx, *target_fwhm_ps, *scan_step_ps, *tolerance)?,
        Command::Reproduce { scenario } => {
            let scenario = scenario
                .map(Into::into)
                .or(ctx.cfg.scenario)
                .ok_or_else(|| Error::InvalidParameter {
                    field: "scenario".into(),
                    reason: "name a scenario on the command line or in the config".into(),
                })?;
            scenarios::reproduce(&mut ctx, scenario)?;
        }
        Command::Diff { .. } => unreachable!("handled above"),
    }
    ctx.finish()?;
    Ok(true)
}

/// Compact number for file names: `10`, `7.5`, `-2`.
pub fn tag(x: f64) -> String {
    let s = format!("{x}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Write a JSI in the requested formats; the raster is scaled by `scale_max`.
pub fn write_jsi(ctx: &mut Context, stem: &str, map: &JsiMap, scale_max: f64) -> Result<()> {
    if ctx.wants(Format::Csv) {
        write_jsi_csv(&ctx.output(&format!("{stem}.csv"), "jsi"), map)?;
    }
    if ctx.wants(Format::Pgm) {
        write_pgm(
            &ctx.output(&format!("{stem}.pgm"), "pgm"),
            &map.intensity,
            scale_max,
        )?;
    }
    Ok(())
}

/// Spectrometer settings recorded with every histogram.
pub fn spectrometer_meta(cfg: &RunConfig) -> Vec<(&'static str, String)> {
    let s = cfg.spectrometer;
    let i = cfg.idler_spectrometer();
    let describe = |x: &SpectrometerSpec| {
        format!(
            "D={} ps/nm; jitter_fwhm={} ps; lambda_ref={} nm; window=[{}, {}] ps; bin={} ps",
            x.full_dispersion_ps_per_nm,
            x.jitter_fwhm_ps,
            x.reference_wavelength_nm,
            x.time_window_ps[0],
            x.time_window_ps[1],
            x.time_bin_ps
        )
    };
    vec![
        ("signal_spectrometer", describe(&s)),
        ("idler_spectrometer", describe(&i)),
    ]
}

fn lobe_axis(kind: InterferenceKind) -> LobeAxis {
    match kind {
        InterferenceKind::Noon => LobeAxis::Sum,
        InterferenceKind::Hom => LobeAxis::Difference,
    }
}

fn jsa(ctx: &mut Context) -> Result<()> {
    let jsa = ctx.jsa()?.clone();
    if ctx.wants(Format::Csv) {
        write_jsa_csv(&ctx.output("jsa.csv", "jsa"), &jsa)?;
    }
    if ctx.wants(Format::Pgm) {
        let intensity = jsa.intensity();
        let max = intensity.iter().copied().fold(0.0, f64::max);
        write_pgm(&ctx.output("jsa.pgm", "pgm"), &intensity, max)?;
    }
    ctx.note("grid_points", jsa.grid().signal.len() as i64);
    ctx.note("norm", jsa.norm());
    if let Ok(asym) = jsa.max_exchange_asymmetry() {
        ctx.note("max_exchange_asymmetry", asym);
    }
    ctx.note("carrier_period_fs", carrier_period(&jsa) * 1e3);
    Ok(())
}

fn custom_scan(
    ctx: &mut Context,
    kind: InterferenceKind,
    start: f64,
    stop: f64,
    step: f64,
) -> Result<()> {
    let jsa = ctx.jsa()?.clone();
    let scan = Interferometer::new(&jsa)?.scan(start, stop, step, kind)?;
    write_scan_csv(
        &ctx.output(&format!("scan_{}.csv", kind.as_str()), "scan"),
        &scan,
    )?;
    let period = (kind == InterferenceKind::Noon).then(|| carrier_period(&jsa));
    ctx.note("visibility", visibility(&scan, period)?);
    Ok(())
}

fn jsi(
    ctx: &mut Context,
    delay: f64,
    phase_over_pi: Option<f64>,
    kind: InterferenceKind,
) -> Result<()> {
    let jsa = ctx.jsa()?.clone();
    let tau = match phase_over_pi {
        Some(p) => delay_at_phase(&jsa, delay, p * PI),
        None => delay,
    };
    let map = jsi_of(&jsa, tau, kind)?;
    let mut stem = format!("jsi_{}_tau{}ps", kind.as_str(), tag(delay));
    if let Some(p) = phase_over_pi {
        stem.push_str(&format!("_phase{}pi", tag(p)));
    }
    write_jsi(ctx, &stem, &map, map.max())?;
    ctx.note("delay_ps", tau);
    ctx.note("phase_rad", map.phase_label);
    ctx.note("coincidence_probability", map.total());
    match lobe_count(&map, ctx.cfg.scan.lobe_threshold) {
        Ok(n) => ctx.note("lobe_count", n as i64),
        Err(e) => log::warn!("lobe count unavailable: {e}"),
    }
    match fringe_orientation(&map.intensity, ORIENTATION_MIN_RADIUS) {
        Ok(o) => ctx.note("fringe_angle_deg", o.fringe_angle_deg),
        Err(e) => log::warn!("fringe orientation unavailable: {e}"),
    }
    Ok(())
}

fn instrument(ctx: &mut Context, jsi_path: Option<&Path>) -> Result<()> {
    let map = match jsi_path {
        Some(p) => read_jsi_csv(p)?,
        None => {
            let jsa = ctx.jsa()?.clone();
            let a = &ctx.cfg.acquisition;
            noon_jsi(&jsa, delay_at_phase(&jsa, a.delay_ps, a.phase_over_pi * PI))?
        }
    };
    let (signal, idler) = (ctx.cfg.spectrometer, ctx.cfg.idler_spectrometer());
    let (arrival, report) = blur_channels(&map, &signal, &idler)?;
    let a = ctx.cfg.acquisition;
    let hist = acquire(&arrival, a.duration_s, a.pair_rate_cps, ctx.cfg.seed)?;
    if ctx.wants(Format::Csv) {
        write_arrival_map_csv(&ctx.output("arrival_map.csv", "arrival_time_map"), &arrival)?;
        let meta = spectrometer_meta(&ctx.cfg);
        write_histogram_csv(&ctx.output("histogram.csv", "histogram"), &hist, &meta)?;
    }
    if ctx.wants(Format::Pgm) {
        let max = arrival.intensity.iter().copied().fold(0.0, f64::max);
        write_pgm(
            &ctx.output("arrival_map.pgm", "pgm"),
            &arrival.intensity,
            max,
        )?;
        let counts = hist.counts.mapv(|c| c as f64);
        let max = counts.iter().copied().fold(0.0, f64::max);
        write_pgm(&ctx.output("histogram.pgm", "pgm"), &counts, max)?;
    }
    ctx.note("delay_ps", map.delay_ps);
    ctx.note("phase_rad", map.phase_label);
    ctx.note("resolution_nm", resolution(&signal)?);
    ctx.note("in_window_fraction", report.in_window_fraction);
    ctx.note("jitter_retained_fraction", report.retained_fraction);
    ctx.note("expected_counts", hist.expected_total);
    ctx.note("total_counts", hist.total() as i64);
    let threshold = ctx.cfg.scan.lobe_threshold;
    let options = LobeOptions {
        threshold,
        axis: lobe_axis(map.kind),
    };
    for (key, result) in [
        ("lobe_count_jsi", count_lobes(&map.intensity, &options)),
        (
            "lobe_count_blurred",
            count_lobes(&arrival.intensity, &options),
        ),
    ] {
        match result {
            Ok(n) => ctx.note(key, n as i64),
            Err(e) => log::warn!("{key} unavailable: {e}"),
        }
    }
    Ok(())
}

fn calibrate(ctx: &mut Context, target: f64, scan_step_ps: f64, tolerance: f64) -> Result<()> {
    if ctx.cfg.source.model != SourceModel::Gaussian {
        return Err(Error::InvalidParameter {
            field: "source.model".into(),
            reason: "calibration applies to the gaussian source model".into(),
        });
    }
    let grid = ctx.cfg.frequency_grid()?;
    let options = CalibrationOptions {
        scan_step_ps,
        bandwidth_tolerance: tolerance,
        ..Default::default()
    };
    let cal = calibrate_along_bandwidth(
        &ctx.cfg.pump,
        &ctx.cfg.gaussian_params()?,
        &grid,
        target,
        &options,
    )?;
    ctx.note("target_fwhm_ps", target);
    ctx.note("scan_step_ps", scan_step_ps);
    ctx.note("bandwidth_tolerance_rad_per_ps", tolerance);
    ctx.note("along_bandwidth_rad_per_ps", cal.params.along_bandwidth);
    ctx.note("envelope_fwhm_ps", cal.envelope_fwhm_ps);
    ctx.note("iterations", cal.iterations as i64);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::tag;

    #[test]
    fn file_name_tags() {
        assert_eq!(tag(10.0), "10");
        assert_eq!(tag(7.5), "7.5");
        assert_eq!(tag(-0.0), "0");
        assert_eq!(tag(-2.0), "-2");
    }
}
