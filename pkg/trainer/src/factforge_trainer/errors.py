class TrainerError(Exception):
    """Domain error: bad inputs, schema violations, impossible training setups."""
