//! `ccrc`: command-line driver for the CC-CRC list decoding lab.

mod args;
mod config;

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ccrc_core::benchmarks::{
    chebyshev_list_bound, complexity_report, design_sweep, design_to_csv, markov_list_bound, parse_pairs,
    ComplexityParams, DesignOptions,
};
use ccrc_core::capacity::{
    capacity_llb, capacity_nnlb, capacity_nnub, capacity_true_closed_form, capacity_vs_list_size,
    estimate_true_row, nearest_neighbor_messages, per_channel_use, TrueRowEstimate, MAX_ROW_K,
};
use ccrc_core::channel::db_to_linear;
use ccrc_core::crcsearch::search_crc;
use ccrc_core::harness::{config_metadata, run_sweep, stats_to_csv, tradeoff_curves};
use ccrc_core::spectrum::enumerate_spectrum_with_budget;
use ccrc_core::{
    ConvCode, CrcCode, FrameLayout, ListSize, MessageMode, SimConfig, Simulator, StoppingRule, TrellisCode,
};
use rand::SeedableRng;

use args::{parse_cc, parse_crc, parse_list_size, snr_grid, u64_list, SnrGrid, U64List};

#[derive(Parser, Debug)]
#[command(name = "ccrc", version, about = "Convolutional code + CRC list decoding lab")]
struct Cli {
    /// Flat key=value file supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CodeArgs {
    /// Convolutional code generators in octal.
    #[arg(long, default_value = "13,17", value_parser = parse_cc)]
    cc: ConvCode,
    /// CRC generator in hex (`none` for plain Viterbi).
    #[arg(long, default_value = "0x43", value_parser = parse_crc)]
    crc: CrcCode,
    /// Message length in bits.
    #[arg(long, default_value_t = 64)]
    k: usize,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write CSV here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl OutputArgs {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo FER / P_UE / P_NACK / E[N_LVA] sweep.
    Simulate(SimulateArgs),
    /// Distance spectrum (d, B_d, A_d).
    Spectrum(SpectrumArgs),
    /// Distance-spectrum-optimal CRC search.
    CrcSearch(CrcSearchArgs),
    /// Markov/Chebyshev list-size bounds or union-bound curves.
    Bounds(BoundsArgs),
    /// Coded-channel capacity models versus SNR.
    Capacity(CapacityArgs),
    /// Complexity model from simulated decoding statistics.
    Complexity(ComplexityArgs),
    /// SNR gap to the normal approximation versus decoding cost.
    DesignSweep(DesignSweepArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// SNR grid in dB: start:step:stop, a comma list, or one value.
    #[arg(long, default_value = "0:1:6", value_parser = snr_grid, allow_hyphen_values = true)]
    snr_db: SnrGrid,
    /// List size, or `max` for the smallest list that never erases.
    #[arg(long, default_value = "max", value_parser = parse_list_size)]
    list_size: ListSize,
    /// Frames per SNR point.
    #[arg(long, default_value_t = 10_000)]
    frames: u64,
    /// Stop each point once the 95% FER half-width is this fraction of the
    /// estimate; `--frames` then acts as the batch size.
    #[arg(long)]
    rel_ci: Option<f64>,
    /// Frame cap under `--rel-ci`.
    #[arg(long, default_value_t = 10_000_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Send the all-zero message instead of random messages.
    #[arg(long)]
    all_zero: bool,
    /// Print the (P_NACK^L, P_UE^L) trade-off for L up to this value instead.
    #[arg(long)]
    tradeoff: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value_t = 24)]
    dmax: usize,
    /// Refuse enumerations costing more cell updates than this.
    #[arg(long, default_value_t = ccrc_core::spectrum::DEFAULT_BUDGET)]
    budget: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CrcSearchArgs {
    #[arg(long, default_value = "13,17", value_parser = parse_cc)]
    cc: ConvCode,
    /// CRC degree.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 64)]
    k: usize,
    /// Largest distance compared.
    #[arg(long, default_value_t = 24)]
    depth: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BoundKind {
    /// Markov and Chebyshev bounds on P_NACK versus L.
    List,
    /// Truncated union bounds and nearest-neighbour approximations versus SNR.
    Union,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, value_enum, default_value = "union")]
    kind: BoundKind,
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value = "0:0.5:8", value_parser = snr_grid, allow_hyphen_values = true)]
    snr_db: SnrGrid,
    /// Truncation distance of the union bounds.
    #[arg(long, default_value_t = 24)]
    d_tilde: usize,
    /// var(N_LVA) for the Chebyshev curve.
    #[arg(long, default_value_t = 0.2823)]
    var_nlva: f64,
    #[arg(long, default_value_t = 32)]
    max_list: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CapacityModel {
    Llb,
    Nnlb,
    Nnub,
    True,
}

#[derive(Args, Debug)]
struct CapacityArgs {
    #[arg(long, value_enum, default_value = "llb")]
    model: CapacityModel,
    #[arg(long, default_value = "13,17", value_parser = parse_cc)]
    cc: ConvCode,
    #[arg(long, default_value = "0x43", value_parser = parse_crc)]
    crc: CrcCode,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, default_value = "-4:2:4", value_parser = snr_grid, allow_hyphen_values = true)]
    snr_db: SnrGrid,
    #[arg(long, default_value = "max", value_parser = parse_list_size)]
    list_size: ListSize,
    #[arg(long, default_value_t = 100_000)]
    frames: u64,
    /// Bootstrap replicates for the interval.
    #[arg(long, default_value_t = 200)]
    bootstrap: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Report bits per channel use (divide by the number of channel bits).
    #[arg(long)]
    per_channel_use: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct ComplexityArgs {
    #[arg(long, default_value = "27,31", value_parser = parse_cc)]
    cc: ConvCode,
    #[arg(long, default_value = "0x709", value_parser = parse_crc)]
    crc: CrcCode,
    #[arg(long, default_value_t = 64)]
    k: usize,
    #[arg(long, default_value = "2", value_parser = snr_grid, allow_hyphen_values = true)]
    snr_db: SnrGrid,
    /// Comma-separated list sizes; each is simulated separately.
    #[arg(long, default_value = "1,2,4,8,16,32,64,128,256,512,1024", value_parser = u64_list)]
    list_sizes: U64List,
    #[arg(long, default_value_t = 20_000)]
    frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1.5)]
    c1: f64,
    #[arg(long, default_value_t = 2.2)]
    c2: f64,
    /// Evaluate the model for a given E[N_LVA] instead of simulating
    /// (requires `--e-ilva`).
    #[arg(long, requires = "e_ilva")]
    e_nlva: Option<f64>,
    #[arg(long, requires = "e_nlva")]
    e_ilva: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct DesignSweepArgs {
    /// File of CC-CRC pairs, one `<octal gens> <hex crc>` per line.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value_t = 64)]
    k: usize,
    #[arg(long, default_value_t = 1e-3)]
    target_fer: f64,
    #[arg(long, default_value_t = 1.5)]
    c1: f64,
    #[arg(long, default_value_t = 2.2)]
    c2: f64,
    #[arg(long, default_value = "max", value_parser = parse_list_size)]
    list_size: ListSize,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    snr_lo: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    snr_hi: f64,
    /// Bisection bracket width at which to stop, in dB.
    #[arg(long, default_value_t = 0.02)]
    tolerance: f64,
    #[arg(long, default_value_t = 2_000)]
    batch: u64,
    #[arg(long, default_value_t = 400_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 20_000)]
    ops_frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

fn main() -> Result<()> {
    let argv = config::merge_config_args(std::env::args_os().collect())?;
    let cli = Cli::parse_from(argv);
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Spectrum(a) => spectrum(a),
        Command::CrcSearch(a) => crc_search(a),
        Command::Bounds(a) => bounds(a),
        Command::Capacity(a) => capacity(a),
        Command::Complexity(a) => complexity(a),
        Command::DesignSweep(a) => design(a),
    }
}

fn layout_of(code: &CodeArgs) -> Result<(TrellisCode, FrameLayout)> {
    let layout = FrameLayout::new(code.k, &code.crc, &code.cc)?;
    Ok((TrellisCode::new(code.cc.clone()), layout))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let stopping = match a.rel_ci {
        None => StoppingRule::Frames(a.frames),
        Some(target) => StoppingRule::RelativeCi {
            target,
            batch: a.frames,
            max_frames: a.max_frames,
        },
    };
    let cfg = SimConfig {
        list_size: a.list_size,
        snr_db: a.snr_db.0.clone(),
        stopping,
        seed: a.seed,
        message_mode: if a.all_zero {
            MessageMode::AllZero
        } else {
            MessageMode::Random
        },
        ..SimConfig::new(a.code.cc.clone(), a.code.crc.clone(), a.code.k)
    };
    cfg.validate()?;
    let sim = Simulator::from_config(&cfg)?;
    let stats = run_sweep(&cfg)?;
    let meta = config_metadata(&cfg, &sim);
    let text = match a.tradeoff {
        None => stats_to_csv(&stats, &meta)?,
        Some(max_l) => {
            let mut out: String = meta.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect();
            out.push_str("snr_db,list_size,p_nack,p_ue\n");
            for s in &stats {
                for p in tradeoff_curves(s, max_l)? {
                    out.push_str(&format!("{},{},{:e},{:e}\n", s.snr_db, p.list_size, p.p_nack, p.p_ue));
                }
            }
            out
        }
    };
    a.out.emit(&text)
}

fn spectrum(a: SpectrumArgs) -> Result<()> {
    let (trellis, layout) = layout_of(&a.code)?;
    let spec = enumerate_spectrum_with_budget(&trellis, &a.code.crc, &layout, a.dmax, a.budget)?;
    a.out.emit(&spec.to_csv())
}

fn crc_search(a: CrcSearchArgs) -> Result<()> {
    let trellis = TrellisCode::new(a.cc.clone());
    let report = search_crc(&trellis, a.k, a.m, a.depth)?;
    let mut text = format!(
        "# cc: {}\n# k: {}\n# m: {}\n# depth: {}\n# d_free: {}\n# winner: {}\n",
        a.cc,
        a.k,
        a.m,
        a.depth,
        report.d_free,
        report.winner.hex_label()
    );
    if !report.tie_set.is_empty() {
        let ties: Vec<String> = report.tie_set.iter().map(CrcCode::hex_label).collect();
        text.push_str(&format!("# tie_set: {}\n", ties.join(" ")));
    }
    text.push_str(&report.to_csv());
    a.out.emit(&text)
}

fn bounds(a: BoundsArgs) -> Result<()> {
    let text = match a.kind {
        BoundKind::List => {
            let mut out = format!("# var_nlva: {}\nlist_size,markov,chebyshev\n", a.var_nlva);
            for l in 1..=a.max_list {
                let cheb = if l >= 2 {
                    chebyshev_list_bound(a.var_nlva, l)?.to_string()
                } else {
                    String::new()
                };
                out.push_str(&format!("{l},{},{cheb}\n", markov_list_bound(l)?));
            }
            out
        }
        BoundKind::Union => {
            let (trellis, layout) = layout_of(&a.code)?;
            let spec = ccrc_core::spectrum::enumerate_spectrum(&trellis, &a.code.crc, &layout, a.d_tilde)?;
            let mut out = format!(
                "# cc: {}\n# crc: {}\n# k: {}\n# d_tilde: {}\nsnr_db,ub_ue,ub_nack,nna_ue,nna_nack\n",
                a.code.cc,
                a.code.crc.hex_label(),
                a.code.k,
                a.d_tilde
            );
            for &db in &a.snr_db.0 {
                let g = db_to_linear(db);
                let nna_ue = spec.nna_ue(g).map_or(String::from("nan"), |v| format!("{v:e}"));
                out.push_str(&format!(
                    "{db},{:e},{:e},{nna_ue},{:e}\n",
                    spec.union_bound_ue(g, a.d_tilde)?,
                    spec.union_bound_nack(g, a.d_tilde)?,
                    spec.nna_nack(g)?
                ));
            }
            out
        }
    };
    a.out.emit(&text)
}

fn model_capacity(model: CapacityModel, est: &TrueRowEstimate, neighbors: &[u64]) -> Result<f64> {
    let m = est.model_with_neighbors(neighbors)?;
    Ok(match model {
        CapacityModel::Llb => capacity_llb(&m),
        CapacityModel::Nnlb => capacity_nnlb(&m)?,
        CapacityModel::Nnub => capacity_nnub(&m)?,
        CapacityModel::True => capacity_true_closed_form(&m)?,
    })
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn capacity(a: CapacityArgs) -> Result<()> {
    let sim = Simulator::new(&a.cc, &a.crc, a.k, a.list_size)?;
    let layout = *sim.layout();
    let scale = |c: f64| if a.per_channel_use { per_channel_use(c, &layout) } else { c };
    let unit = if a.per_channel_use { "bits per channel use" } else { "bits per codeword" };
    let mut out = format!(
        "# cc: {}\n# crc: {}\n# k: {}\n# list_size: {}\n# frames: {}\n# seed: {}\n# unit: {unit}\n",
        a.cc,
        a.crc.hex_label(),
        a.k,
        sim.list_size(),
        a.frames,
        a.seed
    );
    if a.k > MAX_ROW_K {
        if a.model != CapacityModel::Llb {
            bail!("only --model llb is available for k > {MAX_ROW_K}");
        }
        out.push_str("snr_db,capacity,ci_lo,ci_hi\n");
        for &db in &a.snr_db.0 {
            let p = capacity_vs_list_size(&sim, db, &[sim.list_size()], a.frames, a.seed)?[0];
            let (c, h) = (scale(p.capacity), scale(p.ci_half_width));
            out.push_str(&format!("{db},{c},{},{}\n", c - h, c + h));
        }
        return a.out.emit(&out);
    }
    if a.bootstrap < 2 {
        bail!("--bootstrap needs at least 2 replicates");
    }
    let (_, neighbors) = nearest_neighbor_messages(sim.trellis(), sim.crc(), &layout)?;
    out.push_str("snr_db,capacity,ci_lo,ci_hi\n");
    for &db in &a.snr_db.0 {
        let est = estimate_true_row(&sim, db, a.frames, a.seed, MessageMode::Random)?;
        let c = model_capacity(a.model, &est, &neighbors)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
        let mut reps = (0..a.bootstrap)
            .map(|_| model_capacity(a.model, &est.resample(&mut rng)?, &neighbors))
            .collect::<Result<Vec<f64>>>()?;
        reps.sort_by(f64::total_cmp);
        out.push_str(&format!(
            "{db},{},{},{}\n",
            scale(c),
            scale(percentile(&reps, 0.025)),
            scale(percentile(&reps, 0.975))
        ));
    }
    a.out.emit(&out)
}

fn complexity(a: ComplexityArgs) -> Result<()> {
    let params = ComplexityParams::new(a.c1, a.c2)?;
    let layout = FrameLayout::new(a.k, &a.crc, &a.cc)?;
    let mut out = format!(
        "# cc: {}\n# crc: {}\n# k: {}\n# c1: {}\n# c2: {}\n",
        a.cc,
        a.crc.hex_label(),
        a.k,
        a.c1,
        a.c2
    );
    out.push_str("snr_db,list_size,e_nlva,e_ilva,n_viterbi,r_trace,r_ins,r_total,scaled_ops\n");
    let row = |snr: String, l: String, r: ccrc_core::ComplexityReport| {
        format!(
            "{snr},{l},{},{},{},{},{},{},{}\n",
            r.e_nlva, r.e_ilva, r.n_viterbi, r.r_trace, r.r_ins, r.r_total, r.scaled_ops
        )
    };
    if let (Some(n), Some(i)) = (a.e_nlva, a.e_ilva) {
        out.push_str(&row(String::new(), String::new(), complexity_report(&layout, &params, n, i)?));
        return a.out.emit(&out);
    }
    for &l in &a.list_sizes.0 {
        if l == 0 {
            bail!("list sizes must be positive");
        }
        let sim = Simulator::new(&a.cc, &a.crc, a.k, ListSize::Fixed(l))?;
        for (i, &db) in a.snr_db.0.iter().enumerate() {
            let s = sim.run_frames(db, a.seed, i as u64, 0, a.frames, MessageMode::Random)?;
            let r = complexity_report(&layout, &params, s.e_nlva()?, s.e_ilva()?)?;
            out.push_str(&row(db.to_string(), l.to_string(), r));
        }
    }
    a.out.emit(&out)
}

fn design(a: DesignSweepArgs) -> Result<()> {
    let text = fs::read_to_string(&a.pairs).with_context(|| format!("reading {}", a.pairs.display()))?;
    let pairs = parse_pairs(&text)?;
    let opts = DesignOptions {
        list_size: a.list_size,
        params: ComplexityParams::new(a.c1, a.c2)?,
        snr_lo: a.snr_lo,
        snr_hi: a.snr_hi,
        tolerance_db: a.tolerance,
        batch: a.batch,
        max_frames: a.max_frames,
        ops_frames: a.ops_frames,
        seed: a.seed,
        ..DesignOptions::new(a.k, a.target_fer)
    };
    let points = design_sweep(&pairs, &opts)?;
    let mut out = format!("# k: {}\n# target_fer: {}\n# c1: {}\n# c2: {}\n# benchmark: normal approximation\n", a.k, a.target_fer, a.c1, a.c2);
    out.push_str(&design_to_csv(&points));
    a.out.emit(&out)
}
