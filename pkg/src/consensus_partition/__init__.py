"""Consensus clustering in the space of partitions modulo cluster relabeling."""

from .alignment import PairwiseAlignment, align_to, delta, delta_bruteforce
from .consensus import (
    MeanResult,
    MultipleAlignment,
    SolverConfig,
    alignment_mean,
    check_stationarity,
    exhaustive_mean,
    f_value,
    frechet_value,
    g_value,
    h_value,
    mean_partition,
)
from .ensemble import Dataset, EnsembleSpec, gen_gaussian_grid, gen_uniform, generate_ensemble, kmeans
from .errors import CapacityError, ParseError, PartitionError, ValidationError
from .partition import (
    HardLabeling,
    LabeledPartition,
    Permutation,
    frobenius_norm,
    inner_product,
    is_asymmetric,
    make_hard,
    partition_length,
    stabilizer,
)
from .profile import MotifSet, Profile, motifs_of, profile_of, truncate
from .stability import (
    StabilityReport,
    frechet_variation,
    multiple_alignment_instability,
    pairwise_instability,
    stability_sweep,
)

__version__ = "0.1.0"
