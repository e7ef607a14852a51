use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use amaretto::compiler::compile;
use amaretto::emulator::{self, TimingModel};
use amaretto::fxp::FxFormat;
use amaretto::harness::{verify, VerifyMode, VerifySetup};
use amaretto::isa::{read_ambin, write_ambin, ArchConfig, Program};
use amaretto::trig::{sweep, TrigConfig, TrigUnit};
use amaretto::{corpus, gcd};

#[derive(Parser)]
#[command(name = "amaretto", about = "Fixed-point quantum circuit emulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ArchArgs {
    /// Fractional bits of the state fixed-point format.
    #[arg(long, default_value_t = 18)]
    frac_bits: u32,
    /// Capacity of the qubit index fields, as a power of two.
    #[arg(long, default_value_t = 16)]
    max_qubits: u32,
}

impl ArchArgs {
    fn config(&self) -> Result<ArchConfig, String> {
        let format = FxFormat::new(2, self.frac_bits).map_err(|e| e.to_string())?;
        if !self.max_qubits.is_power_of_two() {
            return Err(format!("--max-qubits {} is not a power of two", self.max_qubits));
        }
        let qubit_bits = self.max_qubits.trailing_zeros();
        ArchConfig::new(format, qubit_bits).map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compile an OpenQASM 2.0 file to an instruction binary.
    Compile {
        input: PathBuf,
        /// Output path; defaults to the input with an `.ambin` extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the text instruction listing to a file.
        #[arg(long, value_name = "FILE")]
        listing: Option<PathBuf>,
        #[command(flatten)]
        arch: ArchArgs,
    },
    /// Run a compiled binary or a QASM file and report the final state.
    Run {
        /// `.ambin` or `.qasm` input.
        input: PathBuf,
        /// Write the state to a file: `csv` or `json` inferred by extension.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Print the cycle count and emulated wall time.
        #[arg(long)]
        timing: bool,
        #[arg(long, default_value_t = 100.0)]
        clock_mhz: f64,
        #[command(flatten)]
        arch: ArchArgs,
    },
    /// Compare the emulator to the reference simulator on one file or a
    /// directory of `.qasm` files.
    Verify {
        input: PathBuf,
        /// Write the per-circuit reports as JSON to a file.
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = gcd::DEFAULT_THRESHOLD)]
        threshold: f64,
        /// `endtoend` compares against exact angles, `datapath` against
        /// quantized ones.
        #[arg(long, default_value = "endtoend")]
        mode: String,
        #[command(flatten)]
        arch: ArchArgs,
    },
    /// Corpus maintenance.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
    /// Estimate the cycle count and execution time of one circuit.
    Bench {
        /// `.ambin` or `.qasm` input.
        input: PathBuf,
        #[arg(long, default_value_t = 100.0)]
        clock_mhz: f64,
        #[command(flatten)]
        arch: ArchArgs,
    },
    /// Exhaustively sweep the sine/cosine unit and report the worst error.
    TrigCheck {
        #[arg(long, default_value_t = 8)]
        lut_bits: u32,
        #[arg(long, default_value_t = 2)]
        order: u32,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Write the generated circuits as `.qasm` files.
    Gen {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_mode(s: &str) -> Result<VerifyMode, String> {
    match s {
        "endtoend" => Ok(VerifyMode::EndToEnd),
        "datapath" => Ok(VerifyMode::Datapath),
        other => Err(format!("unknown mode `{other}` (expected endtoend|datapath)")),
    }
}

fn timing_for(clock_mhz: f64) -> TimingModel {
    TimingModel {
        clock_period: 1.0 / (clock_mhz * 1e6),
        ..TimingModel::default()
    }
}

fn load_program(input: &Path, arch: &ArchConfig) -> Result<Program, String> {
    match input.extension().and_then(|e| e.to_str()) {
        Some("ambin") => {
            let bytes = fs::read(input).map_err(|e| format!("{}: {e}", input.display()))?;
            read_ambin(&bytes[..]).map_err(|e| e.to_string())
        }
        _ => {
            let source =
                fs::read_to_string(input).map_err(|e| format!("{}: {e}", input.display()))?;
            compile(&source, arch)
                .map(|out| out.program)
                .map_err(|e| e.to_string())
        }
    }
}

fn cmd_compile(
    input: &Path,
    output: Option<PathBuf>,
    listing: Option<PathBuf>,
    arch: &ArchArgs,
) -> Result<(), String> {
    let arch = arch.config()?;
    let source = fs::read_to_string(input).map_err(|e| format!("{}: {e}", input.display()))?;
    let out = compile(&source, &arch).map_err(|e| e.to_string())?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = listing {
        fs::write(&path, out.program.listing())
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let output = output.unwrap_or_else(|| input.with_extension("ambin"));
    let mut file = fs::File::create(&output).map_err(|e| format!("{}: {e}", output.display()))?;
    write_ambin(&out.program, &mut file).map_err(|e| e.to_string())?;
    eprintln!(
        "{}: {} qubits, {} gates -> {}",
        input.display(),
        out.program.qubit_count,
        out.program.gate_count(),
        output.display()
    );
    Ok(())
}

fn cmd_run(
    input: &Path,
    dump: Option<PathBuf>,
    timing: bool,
    clock_mhz: f64,
    arch: &ArchArgs,
) -> Result<(), String> {
    let config = arch.config()?;
    let program = load_program(input, &config)?;
    let tu = TrigUnit::new(TrigConfig {
        frac_bits: config.frac_bits(),
        ..TrigConfig::default()
    });
    let model = timing_for(clock_mhz);
    let report = emulator::run(&program, &tu, &model).map_err(|e| e.to_string())?;
    match &dump {
        Some(path) if path.extension().and_then(|e| e.to_str()) == Some("json") => {
            let rows: Vec<_> = report
                .read_state()
                .into_iter()
                .map(|(index, re, im)| {
                    let amp = report.state.amplitude(index);
                    serde_json::json!({
                        "index": index,
                        "re_raw": re,
                        "im_raw": im,
                        "re": amp.re,
                        "im": amp.im,
                    })
                })
                .collect();
            let text = serde_json::to_string_pretty(&rows).unwrap();
            fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?;
        }
        Some(path) => {
            let mut file =
                fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            emulator::write_state_csv(&report.state, &mut file).map_err(|e| e.to_string())?;
        }
        None => {
            for (index, re, im) in report.read_state() {
                let amp = report.state.amplitude(index);
                println!("|{index:0width$b}>  {amp:.6}  (raw {re}, {im})", width = report.state.nq() as usize);
            }
        }
    }
    if timing {
        println!(
            "{} gates, {} cycles, {:.3} us at {clock_mhz} MHz",
            report.gate_count,
            report.cycles,
            report.seconds * 1e6
        );
    }
    if report.total_saturation_events() > 0 {
        eprintln!(
            "warning: {} arithmetic saturation events",
            report.total_saturation_events()
        );
    }
    Ok(())
}

fn cmd_verify(
    input: &Path,
    json: Option<PathBuf>,
    threshold: f64,
    mode: &str,
    arch: &ArchArgs,
) -> Result<bool, String> {
    let config = arch.config()?;
    let setup = VerifySetup {
        arch: config,
        trig: TrigUnit::new(TrigConfig {
            frac_bits: config.frac_bits(),
            ..TrigConfig::default()
        }),
        timing: TimingModel::default(),
        threshold,
        mode: parse_mode(mode)?,
    };
    let mut paths = Vec::new();
    if input.is_dir() {
        for entry in fs::read_dir(input).map_err(|e| format!("{}: {e}", input.display()))? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.extension().and_then(|e| e.to_str()) == Some("qasm") {
                paths.push(path);
            }
        }
        paths.sort();
        if paths.is_empty() {
            return Err(format!("{}: no .qasm files", input.display()));
        }
    } else {
        paths.push(input.to_path_buf());
    }
    let mut reports = Vec::new();
    for path in &paths {
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("?");
        let source = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let report = verify(name, &source, &setup).map_err(|e| format!("{name}: {e}"))?;
        println!(
            "{} {:24} nq={:2} gates={:4} gcd={:.3e}",
            if report.pass { "PASS" } else { "FAIL" },
            report.name,
            report.qubits,
            report.gate_count,
            report.max_distance
        );
        reports.push(report);
    }
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&reports).unwrap();
        fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn cmd_bench(input: &Path, clock_mhz: f64, arch: &ArchArgs) -> Result<(), String> {
    let config = arch.config()?;
    let program = load_program(input, &config)?;
    let model = timing_for(clock_mhz);
    let controlled: Vec<bool> = program
        .instructions
        .iter()
        .filter(|i| i.opcode.is_gate())
        .map(|i| i.is_controlled())
        .collect();
    let (cycles, seconds) = emulator::cycle_count(program.qubit_count, &controlled, &model);
    let controlled_count = controlled.iter().filter(|&&c| c).count();
    println!(
        "{}: {} qubits, {} gates ({} controlled)",
        input.display(),
        program.qubit_count,
        controlled.len(),
        controlled_count
    );
    println!(
        "{cycles} cycles, {:.3} us at {clock_mhz} MHz",
        seconds * 1e6
    );
    Ok(())
}

fn cmd_trig_check(lut_bits: u32, order: u32) -> Result<bool, String> {
    let tu = TrigUnit::new(TrigConfig {
        lut_addr_bits: lut_bits,
        taylor_order: order,
        ..TrigConfig::default()
    });
    let stats = sweep(&tu);
    let bound = (-16f64).exp2();
    let worst = stats.max_sin_err.max(stats.max_cos_err);
    println!(
        "swept {} angles: max sin err {:.3e}, max cos err {:.3e}, max |s^2+c^2-1| {:.3e}, bound {bound:.3e}",
        stats.inputs, stats.max_sin_err, stats.max_cos_err, stats.max_norm_dev
    );
    Ok(worst <= bound)
}

fn cmd_corpus_gen(seed: u64, out: &Path) -> Result<(), String> {
    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let entries = corpus::generate(seed);
    let count = entries.len();
    for entry in entries {
        let path = out.join(format!("{}.qasm", entry.name));
        fs::write(&path, &entry.qasm).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    eprintln!("wrote {count} circuits to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compile {
            input,
            output,
            listing,
            arch,
        } => cmd_compile(input, output.clone(), listing.clone(), arch).map(|()| true),
        Command::Run {
            input,
            dump,
            timing,
            clock_mhz,
            arch,
        } => cmd_run(input, dump.clone(), *timing, *clock_mhz, arch).map(|()| true),
        Command::Verify {
            input,
            json,
            threshold,
            mode,
            arch,
        } => cmd_verify(input, json.clone(), *threshold, mode, arch),
        Command::Corpus {
            command: CorpusCommand::Gen { seed, out },
        } => cmd_corpus_gen(*seed, out).map(|()| true),
        Command::Bench {
            input,
            clock_mhz,
            arch,
        } => cmd_bench(input, *clock_mhz, arch).map(|()| true),
        Command::TrigCheck { lut_bits, order } => cmd_trig_check(*lut_bits, *order),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
