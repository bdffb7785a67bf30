use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use gridsense::classifier::SearchMethod;
use gridsense::features::FeatureRecipe;
use gridsense::imagery::ChangeParams;
use gridsense::mapping::load_rules;

use crate::error::Result;
use crate::maps::{map_file, watch_frames, MapOutputs};
use crate::project::Project;
use crate::train::{train_project, TrainRequest, TrialLog};

#[derive(Debug, Parser)]
#[command(name = "gridsense", version, about = "Curate training samples, train and map images")]
pub struct Cli {
    /// Project file.
    #[arg(long, short, global = true, default_value = "project.json")]
    pub project: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Search {
    Random,
    Grid,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a project file.
    Init {
        #[arg(long, value_delimiter = ',', required = true)]
        classes: Vec<String>,
        /// Feature recipe JSON; the default recipe when omitted.
        #[arg(long)]
        recipe: Option<PathBuf>,
        #[arg(long, default_value = "project")]
        name: String,
        #[arg(long)]
        grid_step: Option<u32>,
    },
    /// Add, retag, remove or list training samples.
    Sample {
        #[command(subcommand)]
        action: SampleAction,
    },
    /// Search (C, gamma), train the classifier and store it in the project.
    Train {
        #[arg(long, value_enum, default_value = "random")]
        search: Search,
        #[arg(long, default_value_t = 20)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Classify every grid point of an image.
    Map {
        image: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        limiter: f64,
        /// Classes to mark on the overlay; all when omitted.
        #[arg(long, value_delimiter = ',')]
        classes: Vec<String>,
        #[arg(long)]
        overlay: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate alert rules over a directory of frames; the first frame is
    /// the reference.
    Watch {
        frames: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long, default_value_t = 16)]
        block: u32,
        #[arg(long, default_value_t = 0.8)]
        ncc_min: f64,
        #[arg(long, default_value_t = 10.0)]
        mad_min: f64,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

#[derive(Debug, Subcommand)]
pub enum SampleAction {
    /// Tag a point; `image` is a registered id or a file to register.
    Add {
        image: String,
        x: i32,
        y: i32,
        class: String,
    },
    Retag {
        id: u64,
        class: String,
    },
    Remove {
        id: u64,
    },
    List,
}

fn image_id(project: &mut Project, image: &str) -> Result<String> {
    if project.images.contains_key(image) {
        return Ok(image.to_string());
    }
    project.register_image(Path::new(image))
}

/// Executes one command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Init {
            classes,
            recipe,
            name,
            grid_step,
        } => {
            let recipe = match recipe {
                Some(path) => FeatureRecipe::load(path)?,
                None => FeatureRecipe::default(),
            };
            let mut project = Project::create(&cli.project, name, classes, recipe)?;
            if let Some(step) = grid_step {
                project.grid_step = step;
                project.validate()?;
                project.save()?;
            }
            writeln!(
                out,
                "created {} with classes {}",
                cli.project.display(),
                project.classes.join(", ")
            )?;
        }
        Command::Sample { action } => {
            let mut project = Project::load(&cli.project)?;
            match action {
                SampleAction::Add { image, x, y, class } => {
                    let id = image_id(&mut project, &image)?;
                    let s = project.add_sample(&id, x, y, &class)?;
                    writeln!(out, "sample {} {} ({}, {}) {}", s.id, s.image, s.x, s.y, s.class)?;
                }
                SampleAction::Retag { id, class } => {
                    let s = project.retag_sample(id, &class)?;
                    writeln!(out, "sample {} is now {}", s.id, s.class)?;
                }
                SampleAction::Remove { id } => {
                    project.remove_sample(id)?;
                    writeln!(out, "removed sample {id}")?;
                }
                SampleAction::List => {
                    for s in &project.samples {
                        writeln!(out, "{}\t{}\t{}\t{}\t{}", s.id, s.image, s.x, s.y, s.class)?;
                    }
                    return Ok(());
                }
            }
            project.save()?;
        }
        Command::Train { search, budget, seed } => {
            let mut project = Project::load(&cli.project)?;
            let request = TrainRequest {
                search: match search {
                    Search::Random => SearchMethod::Random,
                    Search::Grid => SearchMethod::Grid,
                },
                budget,
                seed,
            };
            let log = TrialLog::to_file(&project.search_log_path())?;
            train_project(&mut project, &request, Some(&log))?;
            let report = project.report.as_ref().expect("report after training");
            let best = report.best_trial().expect("at least one trial");
            writeln!(
                out,
                "{} trials, best CV accuracy {:.4} at C = 2^{:.2}, gamma = 2^{:.2}; log in {}",
                report.trials.len(),
                best.cv_accuracy,
                best.log2_c,
                best.log2_gamma,
                project.search_log_path().display()
            )?;
        }
        Command::Map {
            image,
            limiter,
            classes,
            overlay,
            report,
        } => {
            let project = Project::load(&cli.project)?;
            let outputs = MapOutputs {
                limiter,
                classes,
                overlay,
                report,
            };
            let map = map_file(&project, &image, &outputs)?;
            for class in &map.classes {
                let n = gridsense::mapping::count_class_points(&map, class, limiter, None)?;
                writeln!(out, "{class}\t{n}")?;
            }
        }
        Command::Watch {
            frames,
            rules,
            block,
            ncc_min,
            mad_min,
        } => {
            let project = Project::load(&cli.project)?;
            let rules = load_rules(rules)?;
            let change = ChangeParams {
                block,
                ncc_min,
                mad_min,
            };
            let mut failed = None;
            watch_frames(&project, &frames, &rules, &change, |event| {
                if failed.is_none() {
                    failed = serde_json::to_string(event)
                        .map_err(std::io::Error::from)
                        .and_then(|line| writeln!(out, "{line}"))
                        .err();
                }
            })?;
            if let Some(e) = failed {
                return Err(e.into());
            }
        }
        Command::Serve { port, host } => {
            let project = Project::load(&cli.project)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::server::serve(project, SocketAddr::new(host, port)))?;
        }
    }
    Ok(())
}
