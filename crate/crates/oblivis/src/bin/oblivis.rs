use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oblivis::bench::{run_bench, BenchConfig, BenchReport};
use oblivis::harness::socket::run_session_over_tcp;
use oblivis::harness::{make_inputs, run_session_with, HarnessError, Inputs, Protocol, RoleOutput, Scheduler, SessionSetup};
use oblivis::verify::verify;
use oblivis_core::ot::mr::MessageMatrix;
use oblivis_core::wire::kind;
use oblivis_core::{Message, SessionConfig};

#[derive(Parser)]
#[command(name = "oblivis", version, about = "Oblivious transfer protocols: demos, benchmarks and property suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one session and print its transcript.
    Demo(DemoArgs),
    /// Time a protocol phase by phase.
    Bench(BenchArgs),
    /// Run the property suites.
    Verify {
        /// `all` or one suite name.
        #[arg(default_value = "all")]
        suite: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Test,
    Production,
}

#[derive(Clone, Copy, ValueEnum)]
enum Transport {
    Memory,
    Tcp,
}

#[derive(Args)]
struct Common {
    /// Master seed; OBLIVIS_SEED takes precedence.
    #[arg(long, default_value = "oblivis")]
    seed: String,
    #[arg(long, value_enum, default_value = "test")]
    profile: Profile,
    /// Choice bit.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    s: u8,
    /// Record index, or the chosen message for the compiled suite.
    #[arg(long, default_value_t = 0)]
    v: usize,
    /// Records, or messages for the compiled suite.
    #[arg(long, default_value_t = 4)]
    z: usize,
    /// Message length parameter in bits.
    #[arg(long)]
    sigma: Option<usize>,
    /// Security parameter in bits.
    #[arg(long)]
    lambda: Option<usize>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(value_parser = parse_protocol)]
    protocol: Protocol,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "message zero")]
    m0: String,
    #[arg(long, default_value = "message one")]
    m1: String,
    #[arg(long, value_enum, default_value = "memory")]
    transport: Transport,
    /// Write the routing log as JSON lines.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = parse_protocol)]
    protocol: Protocol,
    /// Invocations per repetition.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[command(flatten)]
    common: Common,
    /// Append the result to a CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Worker threads per phase. Timings with more than one are exploratory.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse()
}

impl Common {
    fn seed(&self) -> Vec<u8> {
        std::env::var("OBLIVIS_SEED").unwrap_or_else(|_| self.seed.clone()).into_bytes()
    }

    fn setup(&self) -> Result<SessionSetup, String> {
        let mut setup = match self.profile {
            Profile::Test => SessionSetup::test_profile(),
            Profile::Production => SessionSetup::production_profile(),
        };
        if self.sigma.is_some() || self.lambda.is_some() {
            let c = setup.config;
            setup.config = SessionConfig::new(
                self.lambda.unwrap_or(c.lambda.bits()),
                self.sigma.unwrap_or(c.sigma.bits()),
                c.group_bits,
            )
            .map_err(|e| e.to_string())?;
        }
        Ok(setup)
    }
}

fn demo_inputs(args: &DemoArgs) -> Result<Inputs, String> {
    let c = &args.common;
    let s = c.s == 1;
    let (m0, m1) = (Message::from(args.m0.as_str()), Message::from(args.m1.as_str()));
    let matrix = || {
        let pairs = (0..c.z)
            .map(|t| (Message::new(format!("record {t}: {}", args.m0)), Message::new(format!("record {t}: {}", args.m1))))
            .collect();
        MessageMatrix::new(pairs).map_err(|e| e.to_string())
    };
    Ok(match args.protocol {
        Protocol::NaorPinkas | Protocol::Dq | Protocol::Duq | Protocol::Supersonic => {
            make_inputs::pair_and_bit(args.protocol, m0, m1, s)
        }
        Protocol::Dqmr => make_inputs::dqmr(matrix()?, c.v, s),
        Protocol::Duqmr => make_inputs::duqmr(matrix()?, c.v, s),
        Protocol::StrawmanAll | Protocol::StrawmanIndexed => make_inputs::strawman(matrix()?, c.v, s),
        Protocol::Naive | Protocol::Compiled => {
            make_inputs::one_of_n((0..c.z).map(|i| Message::new(format!("message {i}"))).collect(), c.v)
        }
    })
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn demo(args: DemoArgs) -> ExitCode {
    let setup = match args.common.setup() {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let inputs = match demo_inputs(&args) {
        Ok(i) => i,
        Err(e) => return usage(e),
    };
    let seed = args.common.seed();
    let outcome = match args.transport {
        Transport::Memory => run_session_with(args.protocol, &setup, &inputs, &seed, Scheduler::Sequential),
        Transport::Tcp => run_session_over_tcp(args.protocol, &setup, &inputs, &seed),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(HarnessError::Inputs(e)) => return usage(e),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("{} session {}", args.protocol, hex::encode(outcome.log.entries().first().map_or([0; 16], |e| e.envelope.session)));
    for e in outcome.log.entries() {
        let env = &e.envelope;
        println!("  {:>2} -> {:<2} {:<24} {:>6} bytes", env.from.to_string(), env.to.to_string(), kind::name(env.kind), e.size);
    }
    for (role, out) in &outcome.outputs {
        match out {
            RoleOutput::Message(m) => println!("{role} output: {}", String::from_utf8_lossy(m.as_bytes())),
            RoleOutput::RecordCount(z) => println!("{role} output: z = {z}"),
        }
    }
    if let Some(path) = args.log {
        let written = std::fs::File::create(&path).and_then(|f| outcome.log.write_jsonl(std::io::BufWriter::new(f)));
        if let Err(e) = written {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    }
    ExitCode::SUCCESS
}

fn write_csv(path: &PathBuf, report: &BenchReport) -> std::io::Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{}", BenchReport::CSV_HEADER)?;
    }
    writeln!(f, "{}", report.csv_row())
}

fn bench(args: BenchArgs) -> ExitCode {
    let setup = match args.common.setup() {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let mut cfg = BenchConfig::new(args.protocol, args.n as usize, setup);
    cfg.reps = args.reps as usize;
    cfg.seed = args.common.seed();
    cfg.s = args.common.s == 1;
    cfg.v = args.common.v;
    cfg.z = args.common.z;
    cfg.threads = args.threads.max(1);
    let report = match run_bench(&cfg) {
        Ok(r) => r,
        Err(oblivis::bench::BenchError::Config(e)) => return usage(e),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("# {}", report.environment);
    println!("{}", BenchReport::CSV_HEADER);
    println!("{}", report.csv_row());
    if let Some(path) = &args.csv {
        if let Err(e) = write_csv(path, &report) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Demo(args) => demo(args),
        Command::Bench(args) => bench(args),
        Command::Verify { suite } => {
            let results = match verify(&suite) {
                Ok(r) => r,
                Err(e) => return usage(e),
            };
            let mut ok = true;
            for r in &results {
                match &r.failure {
                    None => println!("pass  {}", r.name),
                    Some(why) => {
                        ok = false;
                        println!("FAIL  {}: {why}", r.name)
                    }
                }
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
