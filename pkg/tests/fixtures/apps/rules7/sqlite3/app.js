const express = require('express');
const sqlite3 = require('sqlite3');
const app = express();
const db = new sqlite3.Database(':memory:');

app.post('/notes', (req, res) => {
  const { text } = req.body;
  const row = [text];
  db.run('INSERT INTO notes VALUES (?)', row);
  res.sendStatus(201);
});
