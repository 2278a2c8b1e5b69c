"""Hub-satellite Monte-Carlo study."""
