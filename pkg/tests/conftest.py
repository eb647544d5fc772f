from hypothesis import settings

settings.register_profile("repvar", deadline=None, max_examples=50)
settings.load_profile("repvar")
