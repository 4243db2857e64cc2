const express = require('express');
const { OpusEncoder } = require('@discordjs/opus');
const app = express();
const encoder = new OpusEncoder(48000, 2);

app.post('/encode', (req, res) => {
  const pcm = req.body;
  res.send(encoder.encode(pcm));
});
