use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use skillcheck::compile::{compile, export_dot, CompiledSkillset};
use skillcheck::diag::Diagnostic;
use skillcheck::layer::{parse_layer_model, LayerBinding};
use skillcheck::ltl::{model_check, parse_ltl, Engine, LtlFormula, Verdict};
use skillcheck::lts::{lts_to_dot, Network};
use skillcheck::skill_lang::{lint_skillset, parse_skillset, SkillsetAst};
use skillcheck::system::{builtin_attachment, ClosedSystem, SystemBuilder};

const EXIT_DIAGNOSTICS: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_VIOLATED: u8 = 3;
const EXIT_DISAGREE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "skillcheck",
    version,
    about = "Compile skillsets and model-check them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a skillset.
    Parse {
        #[command(flatten)]
        input: Input,
        /// Print the syntax tree as JSON.
        #[arg(long)]
        dump_ast: bool,
    },
    /// Compile a skillset and print its interface manifest.
    Compile {
        #[command(flatten)]
        input: Input,
        /// Write one Graphviz file per component into DIR.
        #[arg(long, value_name = "DIR")]
        dot: Option<PathBuf>,
    },
    /// Check an LTL property on the closed system.
    Verify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        layers: Layers,
        /// Property text, or @PATH to read it from a file.
        #[arg(long, value_name = "TEXT|@PATH")]
        prop: String,
        #[arg(long, value_enum, default_value_t = EngineArg::Ndfs)]
        engine: EngineArg,
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Leave `time_ms` out of the JSON verdict.
        #[arg(long)]
        no_timing: bool,
        /// Write one Graphviz file per component of the closed system.
        #[arg(long, value_name = "DIR")]
        dot: Option<PathBuf>,
    },
    /// Explore the reachable states of the closed system.
    Explore {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        layers: Layers,
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct Input {
    /// Skillset file.
    #[arg(value_name = "SKILLSET", required_unless_present = "skillset")]
    path: Option<PathBuf>,
    #[arg(long = "skillset", value_name = "PATH", conflicts_with = "path")]
    skillset: Option<PathBuf>,
}

impl Input {
    fn path(&self) -> &Path {
        self.path
            .as_deref()
            .or(self.skillset.as_deref())
            .expect("clap enforces a skillset path")
    }
}

#[derive(Args)]
struct Layers {
    /// Layer model file; repeatable.
    #[arg(long = "layer", value_name = "PATH")]
    layers: Vec<PathBuf>,
    /// Builtin model, e.g. `refined-goto:Bmax=6,Dmax=2`; repeatable.
    #[arg(long = "builtin", value_name = "NAME[:PARAMS]")]
    builtins: Vec<String>,
    /// Close uncovered interfaces with the most abstract models.
    #[arg(long)]
    auto_abstract: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Ndfs,
    Scc,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// A failed run: what to print and the exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: &Path, err: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }

    fn diag(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DIAGNOSTICS,
            message: message.into(),
        }
    }

    fn diagnostics(path: &Path, diags: &[Diagnostic]) -> Self {
        let lines: Vec<String> = diags
            .iter()
            .map(|d| format!("{}:{d}", path.display()))
            .collect();
        Failure::diag(lines.join("\n"))
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn load_skillset(path: &Path) -> Result<SkillsetAst, Failure> {
    let text = read(path)?;
    let ast = parse_skillset(&text).map_err(|d| Failure::diagnostics(path, &d))?;
    for w in lint_skillset(&ast) {
        eprintln!("{}:{w}", path.display());
    }
    Ok(ast)
}

fn load_compiled(path: &Path) -> Result<CompiledSkillset, Failure> {
    let ast = load_skillset(path)?;
    compile(&ast).map_err(|d| Failure::diagnostics(path, &d))
}

fn close(compiled: &CompiledSkillset, layers: &Layers) -> Result<ClosedSystem, Failure> {
    let mut builder = SystemBuilder::new(compiled).auto_abstract(layers.auto_abstract);
    for path in &layers.layers {
        let text = read(path)?;
        let model = parse_layer_model(&text).map_err(|d| Failure::diagnostics(path, &d))?;
        builder = builder.attach(LayerBinding::new(model));
    }
    for spec in &layers.builtins {
        let a = builtin_attachment(spec, compiled).map_err(|e| Failure::diag(e.to_string()))?;
        builder = builder.attach(a);
    }
    builder
        .build()
        .map_err(|e| Failure::diag(format!("error: {e}")))
}

fn write_dots(dir: &Path, components: &[skillcheck::lts::Lts]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    for c in components {
        let file = dir.join(format!("{}.dot", c.name()));
        fs::write(&file, lts_to_dot(c)).map_err(|e| Failure::io(&file, e))?;
    }
    Ok(())
}

fn property(text: &str) -> Result<LtlFormula, Failure> {
    let (source, text) = match text.strip_prefix('@') {
        Some(path) => {
            let path = Path::new(path);
            (path.display().to_string(), read(path)?)
        }
        None => ("property".to_string(), text.to_string()),
    };
    parse_ltl(text.trim()).map_err(|d| Failure::diag(format!("{source}:{d}")))
}

fn render_text(net: &Network, f: &LtlFormula, v: &Verdict) -> String {
    let mut out = format!(
        "{}: {f}\nstates explored: {}\n",
        if v.holds() { "holds" } else { "violated" },
        v.states_explored
    );
    if let Some(lasso) = v.lasso() {
        let names: Vec<&str> = net.components().iter().map(|c| c.name()).collect();
        out.push_str(&format!("components: ({})\n", names.join(",")));
        for (title, steps) in [("prefix", &lasso.prefix), ("cycle", &lasso.cycle)] {
            out.push_str(&format!("{title}:\n"));
            for s in steps.iter() {
                out.push_str(&format!(
                    "  {} --{}-->\n",
                    net.state_label(&s.state),
                    s.event
                ));
            }
        }
    }
    out
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Parse { input, dump_ast } => {
            let ast = load_skillset(input.path())?;
            if dump_ast {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&ast).expect("ast serializes")
                );
            } else {
                println!(
                    "skillset {}: {} resources, {} skills",
                    ast.name,
                    ast.resources.len(),
                    ast.skills.len()
                );
            }
            Ok(0)
        }
        Command::Compile { input, dot } => {
            let compiled = load_compiled(input.path())?;
            if let Some(dir) = dot {
                write_dots(&dir, &compiled.components)?;
                let legend = dir.join("skillset.dot");
                fs::write(&legend, export_dot(&compiled)).map_err(|e| Failure::io(&legend, e))?;
            }
            println!("{}", compiled.manifest.to_json());
            Ok(0)
        }
        Command::Verify {
            input,
            layers,
            prop,
            engine,
            max_states,
            format,
            no_timing,
            dot,
        } => {
            let f = property(&prop)?;
            let compiled = load_compiled(input.path())?;
            let system = close(&compiled, &layers)?;
            let net = &system.network;
            if let Some(dir) = dot {
                write_dots(&dir, net.components())?;
            }
            let check = |e: Engine| {
                model_check(net, &f, e, max_states)
                    .map_err(|e| Failure::diag(format!("error: {e}")))
            };
            let verdict = match engine {
                EngineArg::Ndfs => check(Engine::Ndfs)?,
                EngineArg::Scc => check(Engine::Scc)?,
                EngineArg::Both => {
                    let a = check(Engine::Ndfs)?;
                    let b = check(Engine::Scc)?;
                    if a.holds() != b.holds() {
                        return Err(Failure {
                            code: EXIT_DISAGREE,
                            message: format!(
                                "error: engines disagree (ndfs: {}, scc: {})",
                                if a.holds() { "holds" } else { "violated" },
                                if b.holds() { "holds" } else { "violated" }
                            ),
                        });
                    }
                    a
                }
            };
            match format {
                Format::Json => println!("{}", verdict.to_json(net, !no_timing)),
                Format::Text => print!("{}", render_text(net, &f, &verdict)),
            }
            Ok(if verdict.holds() { 0 } else { EXIT_VIOLATED })
        }
        Command::Explore {
            input,
            layers,
            max_states,
            format,
        } => {
            let compiled = load_compiled(input.path())?;
            let system = close(&compiled, &layers)?;
            let stats = system.network.reachable(max_states);
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&stats).expect("stats serialize")
                ),
                Format::Text => println!(
                    "states: {}\ntransitions: {}\ndeadlocks: {}\ntruncated: {}",
                    stats.states, stats.transitions, stats.deadlocks, stats.truncated
                ),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
