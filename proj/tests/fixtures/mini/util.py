MAX_RETRIES = 3


def backoff(attempt, base=0.5):
    def clamp(value):
        return min(value, 30.0)

    return clamp(base * 2 ** attempt)
