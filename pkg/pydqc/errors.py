# SPDX-License-Identifier: BSD-3-Clause

"""DQC-related error definitions and exceptions."""

DATA_ERRORS = {
    "EMPTY_INPUT": "The input file contains no data rows.",

    "RAGGED_ROW": "A row does not have the same number of fields as the others.",

    "NON_NUMERIC": "A cell could not be parsed as a number.",

    "NON_FINITE": "A cell holds a NaN or infinite value.",

    "LABEL_COLUMN": "The requested label or id column does not exist in the input.",

    "MISSING_INPUT": "The input file does not exist.",

    "ID_MISMATCH": "Two files do not cover the same record ids."
}

class DQCDataError(Exception):
    """Exception raised when an input dataset cannot be ingested."""

    def __init__(self, code:str, message:str = ""):
        self.code = code
        errmsg = DATA_ERRORS[code] if code in DATA_ERRORS else ""
        super(DQCDataError, self).__init__(f"{errmsg} {message}".strip())



NUMERICAL_ERRORS = {
    "UNDEFINED_ENTROPY": "SVD-entropy is undefined for an all-zero matrix.",

    "DEGENERATE_BASIS": "No eigenvalue of the Gram matrix is above the basis cutoff.",

    "NORM_DRIFT": "A state norm drifted beyond tolerance during time evolution.",

    "SVD_NO_CONVERGENCE": "The singular value decomposition did not converge."
}

class DQCNumericalError(Exception):
    """Exception raised when a numerical routine fails or becomes unstable."""

    def __init__(self, code:str, message:str = ""):
        self.code = code
        errmsg = NUMERICAL_ERRORS[code] if code in NUMERICAL_ERRORS else ""
        super(DQCNumericalError, self).__init__(f"{errmsg} {message}".strip())



CONFIG_ERRORS = {
    "UNKNOWN_KEY": "The configuration contains an unknown key.",

    "INVALID_VALUE": "A configuration value could not be parsed.",

    "OUT_OF_RANGE": "A configuration value is outside its allowed range.",

    "MALFORMED": "The configuration document is not a valid pipeline document."
}

class DQCConfigError(ValueError):
    """Exception raised when a pipeline configuration is invalid."""

    def __init__(self, code:str, message:str = ""):
        self.code = code
        errmsg = CONFIG_ERRORS[code] if code in CONFIG_ERRORS else ""
        super(DQCConfigError, self).__init__(f"{errmsg} {message}".strip())
