"""Arithmetic progressions, factor languages and block pictures of
constant-length substitution fixed points."""

from .substitution import (Substitution, SubstitutionError, complement,
                           format_word, generalized_thue_morse,
                           gtm_parameters, has_bar_swap_symmetry,
                           infer_superword_seed, load_substitution,
                           parse_rule_spec, parse_word, superword_letter,
                           thue_morse)
from .fixedpoint import FixedPointWord, fixed_point, gtm_letter, tm_letter
from .progressions import (DifferenceFacts, ExpectedLength, FactClaim,
                           FactsReport, Progression, ProgressionError,
                           ScanReport, diagonal_witness, difference_facts,
                           estimate_longest, expected_length,
                           expected_length_for, letter_maxima,
                           longest_progression, reduce_difference, scan_range,
                           verify_progression)
from .language import (FactorSet, RepetitionReport, RepetitionWitness,
                       asymmetry_witnesses, contains_factor, factor_set,
                       max_run, power_free_check)
from .blocks import (Block, BlockChecks, block_iterate, check_block_lemmas,
                     diagonal, inflate_grid, render)
from .bijective import (FrequencyEstimate, absence_check,
                        diagonal_progression_check, find_recurrent_difference,
                        recurrence_count)
from .suites import SuiteCase, SuiteResult, emit_table, load_table, run_suite

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
