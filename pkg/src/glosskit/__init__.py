"""Retrieval-assisted interlinear glossing toolkit."""

from .igt import (
    IgtEntry,
    InvalidGlossError,
    ParseIssue,
    TagSignature,
    WordGloss,
    parse_corpus,
    parse_word_gloss,
    serialize_corpus,
    serialize_entry,
)
from .index import (
    CorpusIndex,
    approximate_examples,
    build_index,
    exact_examples,
    gloss_distribution,
    lcs_length,
    load_snapshot,
    most_frequent_gloss,
    reverse_lookup,
    save_snapshot,
)
from .retrieval import SentencePrediction, context_candidate, gloss_sentence_retrieval
from .prompts import (
    KBestGlosses,
    MalformedResponseError,
    PromptBundle,
    build_gloss_prompt,
    parse_llm_response,
    select_instructions,
)
from .gateway import (
    BudgetExceededError,
    ChatRequest,
    ConfigViolationError,
    Gateway,
    GatewayConfig,
    HttpBackend,
    MockBackend,
    TransportError,
)
from .pipeline import GlossRun, gloss_corpus, gloss_word, load_run, save_run
from .evaluation import (
    ConfusionMatrix,
    EvalReport,
    confusion_matrix,
    evaluate,
    jaccard,
    morpheme_accuracy,
    oracle_select,
    word_accuracy,
)
from .instructions import (
    ContrastiveInstance,
    InstructionSet,
    InstructionStore,
    TagPair,
    build_instruction_prompt,
    contrastive_instances,
    generate_instructions,
    mine_confusable_pairs,
)
from .service import AnnotationService, AnnotationSession, FeedbackRecord, SessionConfig

__version__ = "0.1.0"
