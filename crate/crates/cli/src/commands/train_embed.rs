use std::path::PathBuf;

use clap::Args;

use textembed::{pca_project, save_embeddings, sentence_embedding, write_scatter_svg, SkipgramConfig};

use crate::commands::common::{load_data, train_embeddings_from_corpus, write_loss_trace};
use crate::config::{ensure_dir, out_dir, FlatConfig, Resolved};
use crate::error::CliError;

#[derive(Args, Debug)]
pub struct TrainEmbedArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus file, one report per line
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub start_lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Optional dataset manifest; when given, sentence embeddings are
    /// projected to 2D and plotted per class
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

pub fn run(args: TrainEmbedArgs) -> Result<(), CliError> {
    let mut file = match &args.config {
        Some(path) => FlatConfig::load(path)?,
        None => FlatConfig::default(),
    };
    let mut resolved = Resolved::default();

    let corpus = resolved
        .optional(&mut file, "corpus", args.corpus.map(|p| p.display().to_string()))?
        .map(PathBuf::from)
        .ok_or_else(|| CliError::data("missing corpus path (--corpus)".to_string()))?;
    let out = out_dir(&mut file, args.out, "embeddings")?;
    let dim = resolved.value(&mut file, "dim", args.dim, 150)?;
    let window = resolved.value(&mut file, "window", args.window, 5)?;
    let negatives = resolved.value(&mut file, "negatives", args.negatives, 5)?;
    let epochs = resolved.value(&mut file, "epochs", args.epochs, 15)?;
    let min_count = resolved.value(&mut file, "min_count", args.min_count, 2)?;
    let start_lr = resolved.value(&mut file, "start_lr", args.start_lr, 0.025)?;
    let seed = resolved.value(&mut file, "seed", args.seed, 7)?;
    let dataset = resolved
        .optional(&mut file, "dataset", args.dataset.map(|p| p.display().to_string()))?
        .map(PathBuf::from);
    file.reject_unknown_keys()?;

    let cfg = SkipgramConfig {
        dim,
        window,
        negatives,
        epochs,
        start_lr,
    };
    let training = train_embeddings_from_corpus(&corpus, &cfg, min_count, seed)?;
    ensure_dir(&out)?;
    save_embeddings(&out.join("embeddings.txt"), &training.model)?;
    write_loss_trace(&out.join("embed_loss.csv"), &training.epoch_losses)?;

    if let Some(manifest) = dataset {
        let data = load_data(&manifest)?;
        let class_codes: Vec<u8> = data.records.iter().map(|r| r.label.code()).collect();
        for (name, title, extract) in [
            (
                "pca_indication.svg",
                "Exam indication sentence embeddings",
                false,
            ),
            ("pca_full_report.svg", "Full report sentence embeddings", true),
        ] {
            let vectors: Vec<Vec<f64>> = data
                .records
                .iter()
                .map(|r| {
                    let text = if extract {
                        r.report.full_text()
                    } else {
                        r.report.indication.clone()
                    };
                    sentence_embedding(&text, &training.model).vector
                })
                .collect();
            let projected = pca_project(&vectors, 2)?;
            let points: Vec<(f64, f64)> = projected.iter().map(|p| (p[0], p[1])).collect();
            write_scatter_svg(&out.join(name), &points, &class_codes, title)?;
        }
    }
    resolved.write_echo(&out)?;
    println!(
        "trained {}-dim embeddings over {} words into {}",
        dim,
        training.model.vocab().len(),
        out.display()
    );
    Ok(())
}
