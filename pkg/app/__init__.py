"""KD Landmarks: granular knowledge landmarks as a regularizer for models trained on local data"""
