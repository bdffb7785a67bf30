use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gridsense::classifier::{ImageSource, ModelBundle, SearchReport, TrainingSet};
use gridsense::features::FeatureRecipe;
use gridsense::imagery::{check_disc_inside, load_rgb, Point};
use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PROJECT_VERSION: u32 = 1;
pub const DEFAULT_GRID_STEP: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    /// Relative paths are resolved against the project file's directory.
    pub path: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: u64,
    pub image: String,
    pub x: i32,
    pub y: i32,
    pub class: String,
    /// Creation ordinal within the project.
    pub created: u64,
}

/// A curation project: classes, recipe, registered images, the tagged
/// training set and the last trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub version: u32,
    pub name: String,
    pub classes: Vec<String>,
    pub recipe: FeatureRecipe,
    pub grid_step: u32,
    pub images: BTreeMap<String, ImageRecord>,
    pub samples: Vec<SampleRecord>,
    pub next_id: u64,
    pub model: Option<ModelBundle>,
    pub report: Option<SearchReport>,
    /// Training set edited since the model was trained.
    pub stale: bool,
    #[serde(skip)]
    path: PathBuf,
}

impl Project {
    pub fn new(name: impl Into<String>, classes: Vec<String>, recipe: FeatureRecipe) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::TooFewClasses);
        }
        for (i, c) in classes.iter().enumerate() {
            if c.trim().is_empty() {
                return Err(Error::Invalid("class names must not be empty".into()));
            }
            if classes[..i].contains(c) {
                return Err(Error::DuplicateClass(c.clone()));
            }
        }
        recipe.validate()?;
        Ok(Self {
            version: PROJECT_VERSION,
            name: name.into(),
            classes,
            recipe,
            grid_step: DEFAULT_GRID_STEP,
            images: BTreeMap::new(),
            samples: Vec::new(),
            next_id: 1,
            model: None,
            report: None,
            stale: false,
            path: PathBuf::new(),
        })
    }

    /// Creates and saves a new project file; refuses to overwrite one.
    pub fn create(
        path: impl AsRef<Path>,
        name: impl Into<String>,
        classes: Vec<String>,
        recipe: FeatureRecipe,
    ) -> Result<Self> {
        let path = path.as_ref();
        if path.exists() {
            return Err(Error::Invalid(format!("{} already exists", path.display())));
        }
        let mut project = Self::new(name, classes, recipe)?;
        project.path = path.to_path_buf();
        project.save()?;
        Ok(project)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut project = Self::from_json(&std::fs::read_to_string(path)?)?;
        project.path = path.to_path_buf();
        Ok(project)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let project: Self = serde_json::from_str(text)?;
        project.validate()?;
        Ok(project)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Checks the schema version and the cross-references of samples,
    /// images, classes and model.
    pub fn validate(&self) -> Result<()> {
        if self.version != PROJECT_VERSION {
            return Err(Error::Version {
                expected: PROJECT_VERSION,
                found: self.version,
            });
        }
        self.recipe.validate()?;
        if self.grid_step == 0 {
            return Err(Error::Invalid("grid_step must be positive".into()));
        }
        for s in &self.samples {
            if !self.images.contains_key(&s.image) {
                return Err(Error::UnknownImage(s.image.clone()));
            }
            if !self.classes.contains(&s.class) {
                return Err(Error::UnknownClass(s.class.clone()));
            }
            if s.id >= self.next_id {
                return Err(Error::Invalid(format!("sample id {} not below next_id", s.id)));
            }
        }
        if let Some(model) = &self.model {
            model.validate()?;
            if model.recipe != self.recipe || model.classes() != self.classes.as_slice() {
                return Err(Error::Invalid(
                    "model was trained with another recipe or class list".into(),
                ));
            }
        }
        Ok(())
    }

    /// Writes the project to the file it was loaded from or created at.
    pub fn save(&self) -> Result<()> {
        if self.path.as_os_str().is_empty() {
            return Err(Error::Invalid("project has no file path".into()));
        }
        let tmp = self.path.with_extension("json.tmp");
        std::fs::write(&tmp, self.to_json()?)?;
        std::fs::rename(&tmp, &self.path)?;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn set_path(&mut self, path: impl Into<PathBuf>) {
        self.path = path.into();
    }

    pub fn root(&self) -> PathBuf {
        self.path.parent().map(Path::to_path_buf).unwrap_or_default()
    }

    /// Sibling JSON-lines file that receives trial results while training.
    pub fn search_log_path(&self) -> PathBuf {
        let stem = self.path.file_stem().and_then(|s| s.to_str()).unwrap_or("project");
        self.root().join(format!("{stem}.search.jsonl"))
    }

    pub fn resolve(&self, stored: &str) -> PathBuf {
        let p = Path::new(stored);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root().join(p)
        }
    }

    pub fn image_path(&self, id: &str) -> Result<PathBuf> {
        let record = self.images.get(id).ok_or_else(|| Error::UnknownImage(id.to_string()))?;
        Ok(self.resolve(&record.path))
    }

    pub fn load_image(&self, id: &str) -> Result<RgbImage> {
        Ok(load_rgb(self.image_path(id)?)?)
    }

    /// Registers an image file (idempotent per path) and returns its id,
    /// derived from the file name.
    pub fn register_image(&mut self, path: impl AsRef<Path>) -> Result<String> {
        let path = path.as_ref();
        let absolute = std::path::absolute(path)?;
        let root = std::path::absolute(self.root())?;
        let stored = match absolute.strip_prefix(&root) {
            Ok(rel) => rel.to_string_lossy().into_owned(),
            Err(_) => absolute.to_string_lossy().into_owned(),
        };
        if let Some((id, _)) = self.images.iter().find(|(_, r)| r.path == stored) {
            return Ok(id.clone());
        }
        let (width, height) = image::image_dimensions(&absolute)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("image").to_string();
        let mut id = stem.clone();
        let mut n = 2;
        while self.images.contains_key(&id) {
            id = format!("{stem}-{n}");
            n += 1;
        }
        self.images.insert(
            id.clone(),
            ImageRecord {
                path: stored,
                width,
                height,
            },
        );
        Ok(id)
    }

    fn check_class(&self, class: &str) -> Result<()> {
        if self.classes.iter().any(|c| c == class) {
            Ok(())
        } else {
            Err(Error::UnknownClass(class.to_string()))
        }
    }

    fn mark_edited(&mut self) {
        self.stale = self.model.is_some();
    }

    pub fn sample(&self, id: u64) -> Result<&SampleRecord> {
        self.samples.iter().find(|s| s.id == id).ok_or(Error::UnknownSample(id))
    }

    pub fn add_sample(&mut self, image: &str, x: i32, y: i32, class: &str) -> Result<SampleRecord> {
        self.check_class(class)?;
        let record = self
            .images
            .get(image)
            .ok_or_else(|| Error::UnknownImage(image.to_string()))?;
        check_disc_inside(Point::new(x, y), self.recipe.max_radius(), record.width, record.height)?;
        if self
            .samples
            .iter()
            .any(|s| s.image == image && s.x == x && s.y == y && s.class == class)
        {
            return Err(Error::DuplicateSample {
                image: image.to_string(),
                x,
                y,
                class: class.to_string(),
            });
        }
        let sample = SampleRecord {
            id: self.next_id,
            image: image.to_string(),
            x,
            y,
            class: class.to_string(),
            created: self.next_id,
        };
        self.next_id += 1;
        self.samples.push(sample.clone());
        self.mark_edited();
        Ok(sample)
    }

    /// Changes a sample's tag; retagging to the current tag changes nothing.
    pub fn retag_sample(&mut self, id: u64, class: &str) -> Result<SampleRecord> {
        self.check_class(class)?;
        let index = self
            .samples
            .iter()
            .position(|s| s.id == id)
            .ok_or(Error::UnknownSample(id))?;
        if self.samples[index].class != class {
            self.samples[index].class = class.to_string();
            self.mark_edited();
        }
        Ok(self.samples[index].clone())
    }

    pub fn remove_sample(&mut self, id: u64) -> Result<SampleRecord> {
        let index = self
            .samples
            .iter()
            .position(|s| s.id == id)
            .ok_or(Error::UnknownSample(id))?;
        let removed = self.samples.remove(index);
        self.mark_edited();
        Ok(removed)
    }

    pub fn training_set(&self) -> TrainingSet {
        let mut set = TrainingSet::new(self.classes.clone());
        for s in &self.samples {
            set.push(s.image.clone(), Point::new(s.x, s.y), s.class.clone());
        }
        set
    }

    pub fn image_source(&self) -> ProjectImages {
        ProjectImages {
            paths: self
                .images
                .keys()
                .map(|id| (id.clone(), self.image_path(id).expect("registered id")))
                .collect(),
        }
    }

    pub fn model(&self) -> Result<&ModelBundle> {
        self.model.as_ref().ok_or(Error::NoModel)
    }
}

/// Loads a project's registered images from disk on demand.
#[derive(Debug, Clone)]
pub struct ProjectImages {
    paths: BTreeMap<String, PathBuf>,
}

impl ImageSource for ProjectImages {
    fn load(&self, id: &str) -> gridsense::Result<RgbImage> {
        let path = self.paths.get(id).ok_or_else(|| {
            gridsense::Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("no image {id:?}"),
            ))
        })?;
        load_rgb(path)
    }
}
