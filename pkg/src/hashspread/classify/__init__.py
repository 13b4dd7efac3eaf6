from .evaluation import (
    CLASSES,
    EvalReport,
    HashtagClass,
    LabeledSet,
    ablation,
    cross_validate,
    evaluate,
    fit_pipeline,
    iter_fold_fits,
    predict,
    read_labels,
    standardize,
    stratified_folds,
    train,
    write_labels,
)
from .models import CART, KNN, LDA, MODELS, GaussianNB, LogisticRegression, ZeroR, make_model
